#include <fstream>
#include <unordered_set>

#include "linggen/datakit.hpp"
#include "linggen/errors.hpp"

namespace linggen {

const std::vector<std::string>& synth_stopwords() {
  static const std::vector<std::string> words = {
      "the", "a", "an", "of", "to", "in", "on", "at", "by", "for",
      "with", "and", "or", "but", "is", "was", "are", "were", "be", "it",
      "this", "that", "these", "those", "he", "she", "they", "we", "you", "i",
      "his", "her", "their", "our", "its", "as", "from", "not", "so", "then"};
  return words;
}

const std::vector<std::string>& synth_common_words() {
  static const std::vector<std::string> words = {
      "cat", "dog", "house", "tree", "river", "city", "garden", "window", "table", "mountain",
      "teacher", "student", "family", "morning", "evening", "village", "market", "letter", "story", "music",
      "water", "fire", "stone", "road", "bridge", "forest", "ocean", "island", "kitchen", "library",
      "doctor", "farmer", "painter", "soldier", "neighbor", "children", "friend", "brother", "sister", "mother",
      "father", "winter", "summer", "autumn", "spring", "weather", "journey", "picture", "question", "answer",
      "problem", "moment", "history", "language", "government", "company", "computer", "business", "animal", "flower",
      "paper", "bread", "apple", "orange", "coffee", "chocolate", "blanket", "pillow", "candle", "mirror",
      "walk", "run", "read", "write", "sing", "build", "carry", "open", "close", "watch",
      "remember", "believe", "consider", "discover", "imagine", "travel", "follow", "answered", "visited", "painted",
      "walked", "opened", "closed", "carried", "wanted", "needed", "learned", "played", "cooked", "cleaned",
      "found", "made", "took", "gave", "saw", "heard", "told", "knew", "thought", "brought",
      "small", "large", "quiet", "happy", "little", "old", "young", "bright", "dark", "warm",
      "cold", "gentle", "simple", "careful", "beautiful", "important", "different", "wonderful", "difficult", "comfortable",
      "green", "blue", "red", "yellow", "golden", "silver", "heavy", "quick", "slow", "strange",
      "quickly", "slowly", "often", "always", "never", "today", "yesterday", "together", "again", "really",
      "very", "almost", "perhaps", "usually", "finally", "suddenly", "nearly", "early", "late", "here",
      "there", "inside", "outside", "above", "below", "after", "before", "during", "around", "through",
      "people", "world", "school", "country", "year", "night", "day", "hand", "eye", "door",
      "light", "sound", "voice", "name", "idea", "place", "work", "home", "life", "time"};
  return words;
}

const std::vector<std::string>& synth_rare_words() {
  static const std::vector<std::string> words = [] {
    const std::vector<std::string> onsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r",
                                             "s", "t", "v", "z", "br", "cl", "dr", "gl", "pr", "str",
                                             "th", "qu", "sn", "fl"};
    const std::vector<std::string> vowels = {"a", "e", "i", "o", "u", "ou", "ea", "io"};
    const std::vector<std::string> codas = {"", "", "n", "r", "x", "m", "l", "sk", "nt", "th"};
    std::unordered_set<std::string> taken;
    for (const auto& w : synth_stopwords()) taken.insert(w);
    for (const auto& w : synth_common_words()) taken.insert(w);
    Rng rng(0x5eedf00dULL);
    std::vector<std::string> out;
    while (out.size() < 60) {
      const int syllables = rng.range(2, 4);
      std::string w;
      for (int s = 0; s < syllables; ++s) {
        w += onsets[rng.below(onsets.size())];
        w += vowels[rng.below(vowels.size())];
        if (s + 1 == syllables) w += codas[rng.below(codas.size())];
      }
      if (taken.insert(w).second) out.push_back(w);
    }
    return out;
  }();
  return words;
}

Lexicons synth_lexicons() {
  std::vector<std::string> ranking = synth_stopwords();
  for (const auto& w : synth_common_words()) ranking.push_back(w);
  return Lexicons(synth_stopwords(), ranking);
}

nlohmann::json SynthSample::to_json() const {
  return {{"n_words", n_words},
          {"n_sentences", sentence_lengths.size()},
          {"sentence_lengths", sentence_lengths},
          {"stop_density", stop_density},
          {"rare_rate", rare_rate}};
}

SynthSample synth_one(Rng& rng, const SynthConfig& cfg) {
  const auto& stop = synth_stopwords();
  const auto& common = synth_common_words();
  const auto& rare = synth_rare_words();

  SynthSample s;
  s.stop_density = cfg.min_stop_density +
                   (cfg.max_stop_density - cfg.min_stop_density) * rng.uniform();
  s.rare_rate = rng.bernoulli(0.3) ? 0.0 : cfg.max_rare_rate * (1.0 - rng.uniform());
  const int n_sentences = rng.range(cfg.min_sentences, cfg.max_sentences);
  for (int si = 0; si < n_sentences; ++si) {
    const int len = rng.range(cfg.min_sentence_words, cfg.max_sentence_words);
    s.sentence_lengths.push_back(len);
    for (int wi = 0; wi < len; ++wi) {
      std::string w;
      if (rng.bernoulli(s.stop_density)) {
        w = stop[rng.below(stop.size())];
      } else if (rng.bernoulli(s.rare_rate)) {
        w = rare[rng.below(rare.size())];
      } else {
        w = common[rng.below(common.size())];
      }
      if (wi == 0 && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
      if (!s.text.empty()) s.text.push_back(' ');
      s.text += w;
    }
    s.text.push_back('.');
    s.n_words += len;
  }
  return s;
}

std::vector<SynthSample> synth_corpus(const SynthConfig& cfg, Rng& rng, int n) {
  if (n < 1) throw Error(ErrorKind::kConfig, "synthetic corpus size must be at least 1");
  std::vector<SynthSample> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(synth_one(rng, cfg));
  return out;
}

void write_synth_jsonl(const std::filesystem::path& path, const std::vector<SynthSample>& samples) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  for (const auto& s : samples) {
    out << nlohmann::json{{"text", s.text}, {"params", s.to_json()}}.dump() << '\n';
  }
}

}  // namespace linggen
