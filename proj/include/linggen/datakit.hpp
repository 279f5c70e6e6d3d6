#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linggen/attributes.hpp"
#include "linggen/rng.hpp"
#include "linggen/vocab.hpp"

namespace linggen {

// --- synthetic corpus -----------------------------------------------------

struct SynthConfig {
  int min_sentence_words = 3;
  int max_sentence_words = 20;
  int min_sentences = 1;
  int max_sentences = 4;
  double min_stop_density = 0.1;
  double max_stop_density = 0.6;
  // Per-document rare-word rate is 0 with probability 0.3, otherwise
  // uniform in (0, max_rare_rate].
  double max_rare_rate = 0.3;
};

struct SynthSample {
  std::string text;
  int n_words = 0;
  std::vector<int> sentence_lengths;
  double stop_density = 0.0;
  double rare_rate = 0.0;

  nlohmann::json to_json() const;
};

// Word lists the generator draws from.
const std::vector<std::string>& synth_stopwords();
const std::vector<std::string>& synth_common_words();
const std::vector<std::string>& synth_rare_words();
// Stopwords plus a ranking of stopwords and common words; every rare
// pseudo-word falls outside the cutoff.
Lexicons synth_lexicons();

SynthSample synth_one(Rng& rng, const SynthConfig& cfg = {});
std::vector<SynthSample> synth_corpus(const SynthConfig& cfg, Rng& rng, int n);
// One JSON object per line: {"text": ..., "params": {...}}.
void write_synth_jsonl(const std::filesystem::path& path, const std::vector<SynthSample>& samples);

// --- ingestion ------------------------------------------------------------

enum class Split { kTrain, kVal, kTest };
std::string_view split_key(Split s);

struct SplitSpec {
  double train = 0.9;
  double val = 0.05;
  double test = 0.05;
  std::uint64_t seed = 0;

  void validate() const;
  // Seeded hash of the record index.
  Split assign(std::uint64_t index) const;
};

struct IngestConfig {
  // Decoder positions including the start token; records keep at most
  // max_len - 1 tokens.
  int max_len = 100;
  int min_freq = 2;
  SplitSpec split;
  ExtractOptions extract;
};

struct CorpusRecord {
  std::string text;
  std::vector<int> token_ids;
  AttributeVector attrs_raw;
  AttributeVector attrs_norm;
  Split split = Split::kTrain;
};

struct PreparedCorpus {
  AttributeSchema schema;
  NormStats norm;
  Vocabulary vocab;
  std::vector<CorpusRecord> train, val, test;
  nlohmann::json manifest;

  const std::vector<CorpusRecord>& split(Split s) const;
};

struct IngestStats {
  std::size_t lines = 0;
  std::size_t accepted = 0;
  std::size_t malformed = 0;
  std::size_t empty = 0;
  std::size_t truncated = 0;
};

// Reads JSONL with a "text" key, truncates, extracts attributes from the
// truncated canonical text, splits, fits normalization on train only, builds
// the vocabulary from train, writes shards plus manifest.json into out_dir.
IngestStats ingest(const std::filesystem::path& input, const AttributeSchema& schema,
                   const Lexicons& lex, const IngestConfig& cfg,
                   const std::filesystem::path& out_dir);

PreparedCorpus load_prepared(const std::filesystem::path& dir);

Vocabulary build_vocab(const PreparedCorpus& corpus, int min_freq);

// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path, std::size_t* malformed = nullptr);

}  // namespace linggen
