#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace linggen {

// Decoder token stream: lowercased words (same word rule as the attribute
// extractor) plus one token per ASCII punctuation byte.
std::vector<std::string> lm_tokenize(std::string_view text);

// Canonical text for a token stream. lm_tokenize(detokenize(t)) == t for any
// stream produced by lm_tokenize.
std::string detokenize(std::span<const std::string> tokens);

bool is_word_token(std::string_view token);

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kSos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;
  static constexpr int kSpecialCount = 4;

  Vocabulary();

  // Frequency-descending, ties broken lexicographically, tokens seen fewer
  // than min_freq times dropped. Specials occupy ids 0..3.
  static Vocabulary build(std::span<const std::vector<std::string>> docs, int min_freq);

  int id(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }
  bool is_special(int id) const { return id >= 0 && id < kSpecialCount; }

  std::vector<int> encode(std::span<const std::string> tokens) const;
  // Drops specials.
  std::vector<std::string> decode(std::span<const int> ids) const;

  nlohmann::json to_json() const;
  static Vocabulary from_json(const nlohmann::json& j);

  bool operator==(const Vocabulary& o) const { return tokens_ == o.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace linggen
