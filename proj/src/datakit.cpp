#include "linggen/datakit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "linggen/errors.hpp"

namespace linggen {

namespace fs = std::filesystem;

std::string_view split_key(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

namespace {

Split parse_split(std::string_view key) {
  if (key == "train") return Split::kTrain;
  if (key == "val") return Split::kVal;
  if (key == "test") return Split::kTest;
  throw Error(ErrorKind::kFormat, "unknown split '" + std::string(key) + "'");
}

nlohmann::json record_json(const CorpusRecord& r) {
  return {{"text", r.text},
          {"token_ids", r.token_ids},
          {"attrs_raw", r.attrs_raw},
          {"attrs_norm", r.attrs_norm},
          {"split", split_key(r.split)}};
}

CorpusRecord record_from_json(const nlohmann::json& j) {
  CorpusRecord r;
  r.text = j.at("text").get<std::string>();
  r.token_ids = j.at("token_ids").get<std::vector<int>>();
  r.attrs_raw = j.at("attrs_raw").get<std::vector<double>>();
  r.attrs_norm = j.at("attrs_norm").get<std::vector<double>>();
  r.split = parse_split(j.at("split").get<std::string>());
  return r;
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream out(path, std::ios::binary);
  out << s;
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

}  // namespace

void SplitSpec::validate() const {
  if (train < 0 || val < 0 || test < 0 || std::abs(train + val + test - 1.0) > 1e-9) {
    throw Error(ErrorKind::kConfig, "split fractions must be non-negative and sum to 1");
  }
}

Split SplitSpec::assign(std::uint64_t index) const {
  const std::uint64_t h = Rng::splitmix64(Rng::splitmix64(seed) ^ index);
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < train) return Split::kTrain;
  if (u < train + val) return Split::kVal;
  return Split::kTest;
}

const std::vector<CorpusRecord>& PreparedCorpus::split(Split s) const {
  switch (s) {
    case Split::kTrain: return train;
    case Split::kVal: return val;
    case Split::kTest: return test;
  }
  return train;
}

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<nlohmann::json> read_jsonl(const fs::path& path, std::size_t* malformed) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + path.string());
  std::vector<nlohmann::json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (!malformed) throw Error(ErrorKind::kFormat, "malformed JSON line in " + path.string());
      ++*malformed;
      continue;
    }
    out.push_back(std::move(j));
  }
  return out;
}

IngestStats ingest(const fs::path& input, const AttributeSchema& schema, const Lexicons& lex,
                   const IngestConfig& cfg, const fs::path& out_dir) {
  cfg.split.validate();
  if (cfg.max_len < 2) throw Error(ErrorKind::kConfig, "max_len must be at least 2");
  std::ifstream in(input);
  if (!in) throw Error(ErrorKind::kIo, "cannot open " + input.string());

  IngestStats stats;
  std::vector<CorpusRecord> records;
  std::vector<std::vector<std::string>> train_tokens;
  std::vector<std::vector<std::string>> all_tokens;
  const auto keep = static_cast<std::size_t>(cfg.max_len - 1);

  std::string line;
  std::uint64_t index = 0;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::uint64_t this_index = index++;
    ++stats.lines;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      ++stats.malformed;
      continue;
    }
    auto tokens = lm_tokenize(j["text"].get<std::string>());
    if (tokens.size() > keep) {
      tokens.resize(keep);
      ++stats.truncated;
    }
    CorpusRecord r;
    r.text = detokenize(tokens);
    try {
      r.attrs_raw = extract(r.text, schema, lex, cfg.extract);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEmptyDocument) throw;
      ++stats.empty;
      continue;
    }
    r.split = cfg.split.assign(this_index);
    if (r.split == Split::kTrain) train_tokens.push_back(tokens);
    all_tokens.push_back(std::move(tokens));
    records.push_back(std::move(r));
  }
  stats.accepted = records.size();
  if (records.empty()) throw Error(ErrorKind::kEmptyCorpus, "no usable records in " + input.string());
  if (train_tokens.empty()) throw Error(ErrorKind::kEmptySplit, "train split is empty");

  std::vector<AttributeVector> train_attrs;
  for (const auto& r : records) {
    if (r.split == Split::kTrain) train_attrs.push_back(r.attrs_raw);
  }
  const NormStats norm = fit_normalizer(train_attrs);
  const Vocabulary vocab = Vocabulary::build(train_tokens, cfg.min_freq);

  fs::create_directories(out_dir);
  std::ostringstream shard[3];
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& r = records[i];
    r.attrs_norm = normalize(r.attrs_raw, norm);
    r.token_ids = vocab.encode(all_tokens[i]);
    const auto s = static_cast<int>(r.split);
    shard[s] << record_json(r).dump() << '\n';
    ++counts[s];
  }

  nlohmann::json manifest;
  manifest["version"] = 1;
  manifest["source"] = input.filename().string();
  manifest["max_len"] = cfg.max_len;
  manifest["min_freq"] = cfg.min_freq;
  manifest["reading_wpm"] = cfg.extract.reading_wpm;
  manifest["split"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  manifest["seeds"] = {{"split", cfg.split.seed}};
  manifest["counts"] = {{"train", counts[0]}, {"val", counts[1]}, {"test", counts[2]}};
  manifest["skipped"] = {{"malformed", stats.malformed}, {"empty", stats.empty}};
  manifest["truncated"] = stats.truncated;
  manifest["schema"] = "schema.json";
  manifest["normstats"] = "normstats.json";
  manifest["vocab"] = "vocab.json";
  manifest["normstats_floored"] = norm.any_floored();

  const char* names[3] = {"train.jsonl", "val.jsonl", "test.jsonl"};
  nlohmann::json sums = nlohmann::json::object();
  for (int s = 0; s < 3; ++s) {
    write_text(out_dir / names[s], shard[s].str());
    sums[names[s]] = file_checksum(out_dir / names[s]);
  }
  schema.save(out_dir / "schema.json");
  norm.save(out_dir / "normstats.json", schema);
  write_text(out_dir / "vocab.json", vocab.to_json().dump() + "\n");
  for (const char* f : {"schema.json", "normstats.json", "vocab.json"}) {
    sums[f] = file_checksum(out_dir / f);
  }
  manifest["checksums"] = sums;
  write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  return stats;
}

PreparedCorpus load_prepared(const fs::path& dir) {
  PreparedCorpus c;
  {
    std::ifstream in(dir / "manifest.json");
    if (!in) throw Error(ErrorKind::kIo, "no manifest.json in " + dir.string());
    c.manifest = nlohmann::json::parse(in);
  }
  c.schema = AttributeSchema::load(dir / c.manifest.value("schema", "schema.json"));
  c.norm = NormStats::load(dir / c.manifest.value("normstats", "normstats.json"), c.schema);
  {
    std::ifstream in(dir / c.manifest.value("vocab", "vocab.json"));
    if (!in) throw Error(ErrorKind::kIo, "no vocab.json in " + dir.string());
    c.vocab = Vocabulary::from_json(nlohmann::json::parse(in));
  }
  for (const auto* name : {"train.jsonl", "val.jsonl", "test.jsonl"}) {
    for (const auto& j : read_jsonl(dir / name)) {
      auto r = record_from_json(j);
      if (r.attrs_raw.size() != c.schema.size() || r.attrs_norm.size() != c.schema.size()) {
        throw Error(ErrorKind::kSchemaMismatch, "record attribute length differs from schema");
      }
      switch (r.split) {
        case Split::kTrain: c.train.push_back(std::move(r)); break;
        case Split::kVal: c.val.push_back(std::move(r)); break;
        case Split::kTest: c.test.push_back(std::move(r)); break;
      }
    }
  }
  return c;
}

Vocabulary build_vocab(const PreparedCorpus& corpus, int min_freq) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& r : corpus.train) docs.push_back(lm_tokenize(r.text));
  return Vocabulary::build(docs, min_freq);
}

}  // namespace linggen
