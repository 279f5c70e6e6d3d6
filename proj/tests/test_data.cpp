#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "linggen/datakit.hpp"
#include "linggen/errors.hpp"
#include "linggen/vocab.hpp"

using namespace linggen;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("linggen_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write_lines(const fs::path& p, const std::vector<std::string>& lines) {
  std::ofstream o(p);
  for (const auto& l : lines) o << l << '\n';
}

}  // namespace

TEST_CASE("decoder tokenization round-trips through detokenize") {
  const auto t = lm_tokenize("Hello, World! It's a well-known (odd) fact: 3.5%.");
  const std::vector<std::string> expect = {"hello", ",", "world", "!", "it's", "a", "well-known", "(", "odd",
                                           ")", "fact", ":", "3", ".", "5", "%", "."};
  CHECK(t == expect);
  const auto text = detokenize(t);
  CHECK(text == "hello, world! it's a well-known (odd) fact: 3. 5%.");
  CHECK(lm_tokenize(text) == t);
  CHECK(is_word_token("it's"));
  CHECK_FALSE(is_word_token(","));

  Rng rng(3);
  const auto samples = synth_corpus({}, rng, 200);
  for (const auto& s : samples) {
    const auto toks = lm_tokenize(s.text);
    CHECK(lm_tokenize(detokenize(toks)) == toks);
  }
}

TEST_CASE("vocabulary ordering and unknown fallback") {
  std::vector<std::vector<std::string>> docs = {{"a", "a", "b"}};
  const auto v = Vocabulary::build(docs, 1);
  CHECK(v.size() == 6);
  CHECK(v.token(0) == "<pad>");
  CHECK(v.token(1) == "<s>");
  CHECK(v.token(2) == "</s>");
  CHECK(v.token(3) == "<unk>");
  CHECK(v.id("a") == 4);
  CHECK(v.id("b") == 5);
  CHECK(v.id("zzz") == Vocabulary::kUnk);

  const auto v3 = Vocabulary::build(docs, 3);
  CHECK(v3.id("b") == Vocabulary::kUnk);
  CHECK(v3.id("a") == Vocabulary::kUnk);

  std::vector<std::vector<std::string>> ties = {{"c", "b", "a", "b", "c"}};
  const auto vt = Vocabulary::build(ties, 1);
  CHECK(vt.id("b") == 4);
  CHECK(vt.id("c") == 5);
  CHECK(vt.id("a") == 6);
  CHECK(Vocabulary::from_json(vt.to_json()) == vt);
  CHECK(vt.decode(std::vector<int>{1, 4, 0, 6, 2}) == std::vector<std::string>{"b", "a"});
}

TEST_CASE("synthetic generator is its own oracle") {
  Rng a(10), b(10);
  const auto s1 = synth_corpus({}, a, 1000);
  const auto s2 = synth_corpus({}, b, 1000);
  const auto schema = AttributeSchema::default_schema();
  const auto lex = synth_lexicons();
  int lo = 1000, hi = 0;
  std::set<int> sentence_counts;
  bool any_soph = false;
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].text == s2[i].text);
    const auto v = extract(s1[i].text, schema, lex);
    CHECK(v[schema.require("n_words")] == s1[i].n_words);
    CHECK(v[schema.require("n_sentences")] == static_cast<double>(s1[i].sentence_lengths.size()));
    for (int len : s1[i].sentence_lengths) {
      lo = std::min(lo, len);
      hi = std::max(hi, len);
    }
    sentence_counts.insert(static_cast<int>(s1[i].sentence_lengths.size()));
    any_soph = any_soph || v[schema.require("n_soph_words")] > 0;
  }
  CHECK(lo == 3);
  CHECK(hi == 20);
  CHECK(sentence_counts == std::set<int>{1, 2, 3, 4});
  CHECK(any_soph);
  for (const auto& w : synth_rare_words()) CHECK(lex.is_sophisticated(w));
  for (const auto& w : synth_common_words()) CHECK_FALSE(lex.is_sophisticated(w));
}

TEST_CASE("split assignment is deterministic and proportional") {
  SplitSpec s;
  s.seed = 4;
  int counts[3] = {0, 0, 0};
  for (std::uint64_t i = 0; i < 20000; ++i) {
    const auto a = s.assign(i);
    CHECK(a == s.assign(i));
    ++counts[static_cast<int>(a)];
  }
  CHECK(std::abs(counts[0] / 20000.0 - 0.9) < 0.01);
  CHECK(std::abs(counts[2] / 20000.0 - 0.05) < 0.01);
  SplitSpec bad;
  bad.train = 0.5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("ingestion truncates, recomputes attributes and avoids leakage") {
  const auto dir = scratch("ingest");
  std::string long_text;
  for (int i = 0; i < 60; ++i) long_text += "word" + std::to_string(i % 7) + " and. ";
  Rng rng(5);
  auto samples = synth_corpus({}, rng, 300);
  std::vector<std::string> lines;
  for (const auto& s : samples) lines.push_back(nlohmann::json{{"text", s.text}}.dump());
  lines.push_back(nlohmann::json{{"text", long_text}}.dump());
  lines.push_back("{not json");
  lines.push_back(R"({"other": 1})");
  lines.push_back(R"({"text": "..."})");
  write_lines(dir / "in.jsonl", lines);

  IngestConfig cfg;
  cfg.max_len = 40;
  cfg.min_freq = 1;
  cfg.split.seed = 3;
  const auto schema = AttributeSchema::default_schema();
  const auto lex = synth_lexicons();
  const auto stats = ingest(dir / "in.jsonl", schema, lex, cfg, dir / "a");
  CHECK(stats.malformed == 2);
  CHECK(stats.empty == 1);
  CHECK(stats.truncated >= 1);
  CHECK(stats.accepted == 301);

  const auto corpus = load_prepared(dir / "a");
  CHECK(corpus.train.size() + corpus.val.size() + corpus.test.size() == 301);
  std::set<std::string> seen;
  std::vector<AttributeVector> train_attrs;
  for (auto split : {Split::kTrain, Split::kVal, Split::kTest}) {
    for (const auto& r : corpus.split(split)) {
      CHECK(r.token_ids.size() <= 39);
      CHECK(extract(r.text, schema, lex) == r.attrs_raw);
      CHECK(lm_tokenize(r.text).size() == r.token_ids.size());
      CHECK(r.split == split);
      if (split == Split::kTrain) train_attrs.push_back(r.attrs_raw);
    }
  }
  // Normalization statistics come from the training shard alone.
  const auto refit = fit_normalizer(train_attrs);
  CHECK(refit.mean == corpus.norm.mean);
  CHECK(refit.stddev == corpus.norm.stddev);

  // Same input and seed: identical bytes.
  ingest(dir / "in.jsonl", schema, lex, cfg, dir / "b");
  CHECK(file_checksum(dir / "a" / "manifest.json") == file_checksum(dir / "b" / "manifest.json"));
  CHECK(corpus.manifest["checksums"] == load_prepared(dir / "b").manifest["checksums"]);

  // Rebuilding the vocabulary from the prepared corpus reproduces it.
  CHECK(build_vocab(corpus, 1) == corpus.vocab);

  write_lines(dir / "empty.jsonl", {"{bad", R"({"text": "  "})"});
  try {
    ingest(dir / "empty.jsonl", schema, lex, cfg, dir / "c");
    FAIL("expected EmptyCorpus");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kEmptyCorpus);
  }
  fs::remove_all(dir);
}
