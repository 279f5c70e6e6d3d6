#include "linggen/vocab.hpp"

#include <algorithm>
#include <map>

#include "linggen/attributes.hpp"
#include "linggen/errors.hpp"

namespace linggen {

namespace {

constexpr std::string_view kSpecials[] = {"<pad>", "<s>", "</s>", "<unk>"};

bool word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

bool space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool attaches_left(std::string_view tok) {
  return tok.size() == 1 && std::string_view(".,!?;:%)]}").find(tok[0]) != std::string_view::npos;
}

bool opens(std::string_view tok) {
  return tok.size() == 1 && std::string_view("([{").find(tok[0]) != std::string_view::npos;
}

}  // namespace

std::vector<std::string> lm_tokenize(std::string_view text) {
  std::vector<std::string> out;
  const std::size_t n = text.size();
  auto at = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = at(i);
    if (space_byte(c)) {
      ++i;
    } else if (word_byte(c)) {
      std::size_t j = i;
      while (j < n) {
        if (word_byte(at(j))) {
          ++j;
        } else if ((at(j) == '\'' || at(j) == '-') && j + 1 < n && word_byte(at(j + 1))) {
          j += 2;
        } else {
          break;
        }
      }
      out.push_back(to_lower_ascii(text.substr(i, j - i)));
      i = j;
    } else {
      out.emplace_back(1, static_cast<char>(c));
      ++i;
    }
  }
  return out;
}

bool is_word_token(std::string_view token) {
  return !token.empty() && word_byte(static_cast<unsigned char>(token[0]));
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  bool prev_open = true;
  for (const auto& tok : tokens) {
    if (!out.empty() && !prev_open && !attaches_left(tok)) out.push_back(' ');
    out += tok;
    prev_open = opens(tok);
  }
  return out;
}

Vocabulary::Vocabulary() {
  for (auto s : kSpecials) {
    index_.emplace(std::string(s), static_cast<int>(tokens_.size()));
    tokens_.emplace_back(s);
  }
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> docs, int min_freq) {
  if (docs.empty()) throw Error(ErrorKind::kEmptyCorpus, "cannot build a vocabulary from no documents");
  std::map<std::string, long> counts;
  for (const auto& doc : docs) {
    for (const auto& t : doc) ++counts[t];
  }
  std::vector<std::pair<std::string, long>> entries;
  for (auto& [tok, n] : counts) {
    if (n >= min_freq) entries.emplace_back(tok, n);
  }
  // counts is ordered lexicographically, so a stable sort keeps ties in order.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocabulary v;
  for (auto& [tok, n] : entries) {
    if (v.index_.contains(tok)) continue;
    v.index_.emplace(tok, static_cast<int>(v.tokens_.size()));
    v.tokens_.push_back(tok);
  }
  return v;
}

int Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnk : it->second;
}

std::vector<int> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const int> ids) const {
  std::vector<std::string> out;
  for (int id : ids) {
    if (!is_special(id)) out.push_back(token(id));
  }
  return out;
}

nlohmann::json Vocabulary::to_json() const { return tokens_; }

Vocabulary Vocabulary::from_json(const nlohmann::json& j) {
  auto toks = j.get<std::vector<std::string>>();
  if (toks.size() < kSpecialCount) throw Error(ErrorKind::kFormat, "vocabulary too small");
  for (int i = 0; i < kSpecialCount; ++i) {
    if (toks[static_cast<std::size_t>(i)] != kSpecials[i]) {
      throw Error(ErrorKind::kFormat, "vocabulary specials out of place");
    }
  }
  Vocabulary v;
  v.tokens_.clear();
  v.index_.clear();
  for (auto& t : toks) {
    if (!v.index_.emplace(t, static_cast<int>(v.tokens_.size())).second) {
      throw Error(ErrorKind::kFormat, "duplicate vocabulary entry '" + t + "'");
    }
    v.tokens_.push_back(std::move(t));
  }
  return v;
}

}  // namespace linggen
