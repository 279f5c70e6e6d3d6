#include "linggen/attributes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "linggen/errors.hpp"

namespace linggen {

namespace {

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;
}

bool is_joiner(unsigned char c) { return c == '\'' || c == '-'; }

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminator(unsigned char c) { return c == '.' || c == '!' || c == '?'; }

bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

// Code points among the alphanumeric bytes (UTF-8 continuation bytes skipped).
int count_chars(std::string_view word) {
  int n = 0;
  for (unsigned char c : word) {
    if (is_joiner(c)) continue;
    if ((c & 0xC0) == 0x80) continue;
    ++n;
  }
  return n;
}

constexpr std::array<std::string_view, kExtractorCount> kExtractorKeys = {
    "n_words",
    "n_unique_words",
    "ttr",
    "n_soph_words",
    "n_unique_soph_words",
    "n_unique_lexical",
    "n_unique_soph_lexical",
    "lexical_sophistication",
    "n_stopwords",
    "n_sentences",
    "n_chars",
    "words_per_sentence",
    "chars_per_sentence",
    "chars_per_word",
    "syllables_per_sentence",
    "ari",
    "reading_time",
};

constexpr std::array<std::string_view, kExtractorCount> kExtractorNames = {
    "# Total Words",
    "# Unique Words",
    "Ratio of Unique Words",
    "# Total Sophisticated Words",
    "# Unique Sophisticated Words",
    "# Unique Lexical Words",
    "# Unique Sophisticated Lexical Words",
    "Lexical Sophistication (unique)",
    "# Stop Words",
    "# Sentences",
    "# Characters",
    "Average Words Per Sentence",
    "Average Characters Per Sentence",
    "Average Characters Per Word",
    "Average Syllables Per Sentence",
    "Automated Readability Index",
    "Reading Time (s)",
};

constexpr std::array<Extractor, kExtractorCount> kAllExtractors = {
    Extractor::kTotalWords,
    Extractor::kUniqueWords,
    Extractor::kTypeTokenRatio,
    Extractor::kTotalSophisticatedWords,
    Extractor::kUniqueSophisticatedWords,
    Extractor::kUniqueLexicalWords,
    Extractor::kUniqueSophisticatedLexicalWords,
    Extractor::kLexicalSophistication,
    Extractor::kStopwords,
    Extractor::kSentences,
    Extractor::kCharacters,
    Extractor::kWordsPerSentence,
    Extractor::kCharactersPerSentence,
    Extractor::kCharactersPerWord,
    Extractor::kSyllablesPerSentence,
    Extractor::kAutomatedReadabilityIndex,
    Extractor::kReadingTime,
};

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && is_space(static_cast<unsigned char>(line.back()))) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && is_space(static_cast<unsigned char>(line[start]))) ++start;
    if (start < line.size()) out.push_back(to_lower_ascii(line.substr(start)));
  }
  return out;
}

struct TextCounts {
  double words = 0;
  double unique_words = 0;
  double soph_words = 0;
  double unique_soph_words = 0;
  double unique_lexical = 0;
  double unique_soph_lexical = 0;
  double stopwords = 0;
  double sentences = 0;
  double chars = 0;
  double syllables = 0;
};

TextCounts count_text(const TokenizedText& tt, const Lexicons& lex) {
  TextCounts c;
  std::unordered_set<std::string> seen;
  c.sentences = static_cast<double>(tt.sentences.size());
  for (const auto& sentence : tt.sentences) {
    for (const auto& tok : sentence) {
      c.words += 1;
      c.chars += tok.chars;
      c.syllables += tok.syllables;
      const bool stop = lex.is_stopword(tok.lower);
      const bool soph = lex.is_sophisticated(tok.lower);
      if (stop) c.stopwords += 1;
      if (soph) c.soph_words += 1;
      if (seen.insert(tok.lower).second) {
        c.unique_words += 1;
        if (soph) c.unique_soph_words += 1;
        if (!stop) {
          c.unique_lexical += 1;
          if (soph) c.unique_soph_lexical += 1;
        }
      }
    }
  }
  return c;
}

}  // namespace

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::size_t TokenizedText::word_count() const {
  std::size_t n = 0;
  for (const auto& s : sentences) n += s.size();
  return n;
}

TokenizedText segment_and_tokenize(std::string_view text) {
  TokenizedText out;
  std::vector<Token> current;
  const std::size_t n = text.size();
  auto at = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };

  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = at(i);
    if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < n) {
        if (is_word_byte(at(j))) {
          ++j;
        } else if (is_joiner(at(j)) && j + 1 < n && is_word_byte(at(j + 1))) {
          j += 2;
        } else {
          break;
        }
      }
      Token tok;
      tok.surface = std::string(text.substr(i, j - i));
      tok.lower = to_lower_ascii(tok.surface);
      tok.chars = count_chars(tok.surface);
      tok.syllables = count_syllables(tok.lower);
      current.push_back(std::move(tok));
      i = j;
      continue;
    }
    if (is_terminator(c) && (i + 1 == n || is_space(at(i + 1)))) {
      if (!current.empty()) {
        out.sentences.push_back(std::move(current));
        current.clear();
      }
    }
    ++i;
  }
  if (!current.empty()) out.sentences.push_back(std::move(current));
  if (out.sentences.empty()) throw Error(ErrorKind::kEmptyDocument, "document has no words");
  return out;
}

int count_syllables(std::string_view word) {
  int groups = 0;
  bool in_group = false;
  for (char ch : word) {
    const bool v = is_vowel(ch);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  const std::size_t n = word.size();
  if (n >= 1 && word[n - 1] == 'e') {
    const bool consonant_le = n >= 3 && word[n - 2] == 'l' && !is_vowel(word[n - 3]);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

// --- Lexicons -------------------------------------------------------------

Lexicons::Lexicons(std::vector<std::string> stopwords, std::vector<std::string> ranking,
                   std::optional<std::size_t> cutoff)
    : stopword_list_(std::move(stopwords)), ranking_(std::move(ranking)) {
  std::unordered_set<std::string> dup;
  for (auto& w : ranking_) {
    w = to_lower_ascii(w);
    if (!dup.insert(w).second) {
      throw Error(ErrorKind::kFormat, "frequency ranking has duplicate word '" + w + "'");
    }
  }
  cutoff_ = cutoff.value_or(std::min(kDefaultCutoff, ranking_.size()));
  if (cutoff_ == 0 && !ranking_.empty()) {
    throw Error(ErrorKind::kConfig, "sophistication cutoff must be positive");
  }
  if (cutoff_ > ranking_.size()) {
    throw Error(ErrorKind::kConfig, "sophistication cutoff exceeds frequency ranking length");
  }
  for (auto& w : stopword_list_) {
    w = to_lower_ascii(w);
    stopwords_.insert(w);
  }
  common_.insert(ranking_.begin(), ranking_.begin() + static_cast<std::ptrdiff_t>(cutoff_));
}

Lexicons Lexicons::load(const std::filesystem::path& dir, std::optional<std::size_t> cutoff) {
  return Lexicons(read_lines(dir / "stopwords.txt"), read_lines(dir / "frequency.txt"), cutoff);
}

void Lexicons::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ofstream s(dir / "stopwords.txt");
  for (const auto& w : stopword_list_) s << w << '\n';
  std::ofstream f(dir / "frequency.txt");
  for (const auto& w : ranking_) f << w << '\n';
  if (!s || !f) throw Error(ErrorKind::kIo, "cannot write lexicons to " + dir.string());
}

bool Lexicons::is_stopword(std::string_view lower) const {
  return stopwords_.contains(std::string(lower));
}

bool Lexicons::is_sophisticated(std::string_view lower) const {
  return !common_.contains(std::string(lower));
}

// --- Schema ---------------------------------------------------------------

std::string_view extractor_key(Extractor e) { return kExtractorKeys[static_cast<int>(e)]; }

std::optional<Extractor> parse_extractor(std::string_view key) {
  for (int i = 0; i < kExtractorCount; ++i) {
    if (kExtractorKeys[i] == key) return static_cast<Extractor>(i);
  }
  return std::nullopt;
}

std::span<const Extractor> all_extractors() { return kAllExtractors; }

AttributeSchema::AttributeSchema(std::vector<AttributeDef> defs) : defs_(std::move(defs)) {
  std::unordered_set<std::string> ids;
  for (const auto& d : defs_) {
    if (!ids.insert(d.id).second) {
      throw Error(ErrorKind::kConfig, "duplicate attribute id '" + d.id + "'");
    }
  }
}

AttributeSchema AttributeSchema::default_schema() {
  std::vector<AttributeDef> defs;
  for (auto e : kAllExtractors) {
    if (e == Extractor::kReadingTime) continue;
    const auto i = static_cast<std::size_t>(e);
    defs.push_back({std::string(kExtractorKeys[i]), std::string(kExtractorNames[i]), e});
  }
  return AttributeSchema(std::move(defs));
}

AttributeSchema AttributeSchema::all() {
  std::vector<AttributeDef> defs;
  for (auto e : kAllExtractors) {
    const auto i = static_cast<std::size_t>(e);
    defs.push_back({std::string(kExtractorKeys[i]), std::string(kExtractorNames[i]), e});
  }
  return AttributeSchema(std::move(defs));
}

AttributeSchema AttributeSchema::from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw Error(ErrorKind::kFormat, "schema must be a JSON array");
  std::vector<AttributeDef> defs;
  for (const auto& rec : j) {
    const auto id = rec.at("id").get<std::string>();
    const auto key = rec.value("extractor", id);
    const auto e = parse_extractor(key);
    if (!e) throw Error(ErrorKind::kUnknownAttributeId, "unknown extractor '" + key + "'");
    defs.push_back({id, rec.value("name", id), *e});
  }
  return AttributeSchema(std::move(defs));
}

AttributeSchema AttributeSchema::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return from_json(nlohmann::json::parse(in));
}

nlohmann::json AttributeSchema::to_json() const {
  auto j = nlohmann::json::array();
  for (const auto& d : defs_) {
    j.push_back({{"id", d.id}, {"name", d.name}, {"extractor", extractor_key(d.extractor)}});
  }
  return j;
}

void AttributeSchema::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  out << to_json().dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

std::optional<std::size_t> AttributeSchema::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].id == id) return i;
  }
  return std::nullopt;
}

std::size_t AttributeSchema::require(std::string_view id) const {
  auto i = index_of(id);
  if (!i) throw Error(ErrorKind::kUnknownAttributeId, "unknown attribute id '" + std::string(id) + "'");
  return *i;
}

std::vector<std::string> AttributeSchema::ids() const {
  std::vector<std::string> out;
  for (const auto& d : defs_) out.push_back(d.id);
  return out;
}

bool AttributeSchema::operator==(const AttributeSchema& other) const {
  if (defs_.size() != other.defs_.size()) return false;
  for (std::size_t i = 0; i < defs_.size(); ++i) {
    if (defs_[i].id != other.defs_[i].id || defs_[i].extractor != other.defs_[i].extractor) {
      return false;
    }
  }
  return true;
}

// --- Extraction -----------------------------------------------------------

Extraction extract_detailed(std::string_view text, const AttributeSchema& schema,
                            const Lexicons& lex, const ExtractOptions& opts) {
  const auto tt = segment_and_tokenize(text);
  const auto c = count_text(tt, lex);

  Extraction out;
  out.values.reserve(schema.size());
  for (const auto& def : schema.defs()) {
    double v = 0.0;
    switch (def.extractor) {
      case Extractor::kTotalWords: v = c.words; break;
      case Extractor::kUniqueWords: v = c.unique_words; break;
      case Extractor::kTypeTokenRatio: v = c.unique_words / c.words; break;
      case Extractor::kTotalSophisticatedWords: v = c.soph_words; break;
      case Extractor::kUniqueSophisticatedWords: v = c.unique_soph_words; break;
      case Extractor::kUniqueLexicalWords: v = c.unique_lexical; break;
      case Extractor::kUniqueSophisticatedLexicalWords: v = c.unique_soph_lexical; break;
      case Extractor::kLexicalSophistication:
        if (c.unique_lexical > 0) {
          v = c.unique_soph_lexical / c.unique_lexical;
        } else {
          out.degenerate.push_back(def.id);
        }
        break;
      case Extractor::kStopwords: v = c.stopwords; break;
      case Extractor::kSentences: v = c.sentences; break;
      case Extractor::kCharacters: v = c.chars; break;
      case Extractor::kWordsPerSentence: v = c.words / c.sentences; break;
      case Extractor::kCharactersPerSentence: v = c.chars / c.sentences; break;
      case Extractor::kCharactersPerWord: v = c.chars / c.words; break;
      case Extractor::kSyllablesPerSentence: v = c.syllables / c.sentences; break;
      case Extractor::kAutomatedReadabilityIndex:
        v = 4.71 * (c.chars / c.words) + 0.5 * (c.words / c.sentences) - 21.43;
        break;
      case Extractor::kReadingTime: v = 60.0 * c.words / opts.reading_wpm; break;
    }
    out.values.push_back(v);
  }
  return out;
}

AttributeVector extract(std::string_view text, const AttributeSchema& schema,
                        const Lexicons& lex, const ExtractOptions& opts) {
  return extract_detailed(text, schema, lex, opts).values;
}

// --- Normalization --------------------------------------------------------

bool NormStats::any_floored() const {
  return std::any_of(floored.begin(), floored.end(), [](bool b) { return b; });
}

NormStats fit_normalizer(std::span<const AttributeVector> vectors) {
  if (vectors.size() < 2) {
    throw Error(ErrorKind::kInsufficientData, "normalizer needs at least 2 vectors");
  }
  const std::size_t k = vectors.front().size();
  NormStats s;
  s.mean.assign(k, 0.0);
  s.stddev.assign(k, 0.0);
  s.floored.assign(k, false);
  for (const auto& v : vectors) {
    if (v.size() != k) throw Error(ErrorKind::kLengthMismatch, "ragged attribute vectors");
    for (std::size_t i = 0; i < k; ++i) s.mean[i] += v[i];
  }
  const auto n = static_cast<double>(vectors.size());
  for (auto& m : s.mean) m /= n;
  for (const auto& v : vectors) {
    for (std::size_t i = 0; i < k; ++i) {
      const double d = v[i] - s.mean[i];
      s.stddev[i] += d * d;
    }
  }
  for (std::size_t i = 0; i < k; ++i) {
    s.stddev[i] = std::sqrt(s.stddev[i] / n);
    if (!(s.stddev[i] >= NormStats::kStdFloor)) {
      s.stddev[i] = NormStats::kStdFloor;
      s.floored[i] = true;
    }
  }
  return s;
}

AttributeVector normalize(std::span<const double> v, const NormStats& s) {
  if (v.size() != s.size()) throw Error(ErrorKind::kLengthMismatch, "normalize: length mismatch");
  AttributeVector z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - s.mean[i]) / s.stddev[i];
  return z;
}

AttributeVector denormalize(std::span<const double> z, const NormStats& s) {
  if (z.size() != s.size()) throw Error(ErrorKind::kLengthMismatch, "denormalize: length mismatch");
  AttributeVector v(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) v[i] = z[i] * s.stddev[i] + s.mean[i];
  return v;
}

nlohmann::json NormStats::to_json(const AttributeSchema& schema) const {
  if (schema.size() != size()) throw Error(ErrorKind::kLengthMismatch, "normstats/schema size");
  nlohmann::json j = nlohmann::json::object();
  for (std::size_t i = 0; i < size(); ++i) {
    j[schema[i].id] = {{"mean", mean[i]}, {"std", stddev[i]}};
    if (floored[i]) j[schema[i].id]["floored"] = true;
  }
  return j;
}

NormStats NormStats::from_json(const nlohmann::json& j, const AttributeSchema& schema) {
  NormStats s;
  for (const auto& def : schema.defs()) {
    if (!j.contains(def.id)) {
      throw Error(ErrorKind::kSchemaMismatch, "normstats missing attribute '" + def.id + "'");
    }
    const auto& e = j.at(def.id);
    s.mean.push_back(e.at("mean").get<double>());
    s.stddev.push_back(e.at("std").get<double>());
    s.floored.push_back(e.value("floored", false));
  }
  return s;
}

void NormStats::save(const std::filesystem::path& path, const AttributeSchema& schema) const {
  std::ofstream out(path);
  out << to_json(schema).dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

NormStats NormStats::load(const std::filesystem::path& path, const AttributeSchema& schema) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  return from_json(nlohmann::json::parse(in), schema);
}

}  // namespace linggen
