#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

namespace linggen {

struct Token {
  std::string surface;
  std::string lower;
  int chars = 0;
  int syllables = 0;
};

struct TokenizedText {
  std::vector<std::vector<Token>> sentences;

  std::size_t word_count() const;
};

// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
// Words are maximal alphanumeric runs joined by internal apostrophes or
// hyphens. Bytes >= 0x80 count as alphanumeric so UTF-8 letters stay inside
// words. Throws EmptyDocument when no word is found.
TokenizedText segment_and_tokenize(std::string_view text);

// Vowel groups (a, e, i, o, u, y) minus a terminal silent 'e' unless the word
// ends in consonant + "le"; never below 1.
int count_syllables(std::string_view lower_word);

std::string to_lower_ascii(std::string_view s);

class Lexicons {
 public:
  static constexpr std::size_t kDefaultCutoff = 2000;

  Lexicons() = default;
  // cutoff defaults to min(kDefaultCutoff, ranking size).
  Lexicons(std::vector<std::string> stopwords, std::vector<std::string> frequency_ranking,
           std::optional<std::size_t> cutoff = std::nullopt);

  // Reads DIR/stopwords.txt and DIR/frequency.txt (one word per line).
  static Lexicons load(const std::filesystem::path& dir,
                       std::optional<std::size_t> cutoff = std::nullopt);
  void save(const std::filesystem::path& dir) const;

  bool is_stopword(std::string_view lower) const;
  bool is_sophisticated(std::string_view lower) const;

  std::size_t cutoff() const { return cutoff_; }
  const std::vector<std::string>& ranking() const { return ranking_; }
  const std::vector<std::string>& stopword_list() const { return stopword_list_; }

 private:
  std::vector<std::string> stopword_list_;
  std::vector<std::string> ranking_;
  std::unordered_set<std::string> stopwords_;
  std::unordered_set<std::string> common_;
  std::size_t cutoff_ = 0;
};

enum class Extractor {
  kTotalWords,
  kUniqueWords,
  kTypeTokenRatio,
  kTotalSophisticatedWords,
  kUniqueSophisticatedWords,
  kUniqueLexicalWords,
  kUniqueSophisticatedLexicalWords,
  kLexicalSophistication,
  kStopwords,
  kSentences,
  kCharacters,
  kWordsPerSentence,
  kCharactersPerSentence,
  kCharactersPerWord,
  kSyllablesPerSentence,
  kAutomatedReadabilityIndex,
  kReadingTime,
};

inline constexpr int kExtractorCount = 17;

std::string_view extractor_key(Extractor e);
std::optional<Extractor> parse_extractor(std::string_view key);
// Every extractor in declaration order.
std::span<const Extractor> all_extractors();

struct AttributeDef {
  std::string id;
  std::string name;
  Extractor extractor;
};

class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<AttributeDef> defs);

  // The 16 extractors other than reading time; reading time is a fixed
  // multiple of the word count.
  static AttributeSchema default_schema();
  static AttributeSchema all();
  static AttributeSchema from_json(const nlohmann::json& j);
  static AttributeSchema load(const std::filesystem::path& path);

  nlohmann::json to_json() const;
  void save(const std::filesystem::path& path) const;

  std::size_t size() const { return defs_.size(); }
  const AttributeDef& operator[](std::size_t i) const { return defs_[i]; }
  const std::vector<AttributeDef>& defs() const { return defs_; }
  std::optional<std::size_t> index_of(std::string_view id) const;
  // Throws UnknownAttributeId.
  std::size_t require(std::string_view id) const;
  std::vector<std::string> ids() const;

  bool operator==(const AttributeSchema& other) const;

 private:
  std::vector<AttributeDef> defs_;
};

using AttributeVector = std::vector<double>;

struct ExtractOptions {
  double reading_wpm = 240.0;
};

struct Extraction {
  AttributeVector values;
  // Ids of ratio attributes whose denominator was zero (value reported as 0).
  std::vector<std::string> degenerate;
};

Extraction extract_detailed(std::string_view text, const AttributeSchema& schema,
                            const Lexicons& lex, const ExtractOptions& opts = {});
AttributeVector extract(std::string_view text, const AttributeSchema& schema,
                        const Lexicons& lex, const ExtractOptions& opts = {});

struct NormStats {
  std::vector<double> mean;
  std::vector<double> stddev;
  // True where the sample deviation fell below kStdFloor and was replaced.
  std::vector<bool> floored;

  static constexpr double kStdFloor = 1e-6;

  std::size_t size() const { return mean.size(); }
  bool any_floored() const;

  nlohmann::json to_json(const AttributeSchema& schema) const;
  static NormStats from_json(const nlohmann::json& j, const AttributeSchema& schema);
  void save(const std::filesystem::path& path, const AttributeSchema& schema) const;
  static NormStats load(const std::filesystem::path& path, const AttributeSchema& schema);
};

// Population statistics per attribute. Needs at least two vectors.
NormStats fit_normalizer(std::span<const AttributeVector> vectors);

AttributeVector normalize(std::span<const double> v, const NormStats& s);
AttributeVector denormalize(std::span<const double> z, const NormStats& s);

}  // namespace linggen
