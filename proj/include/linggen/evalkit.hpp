#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linggen/checkpoint.hpp"
#include "linggen/datakit.hpp"
#include "linggen/lm.hpp"

namespace linggen {

// Mean squared difference over the controlled entries. Throws
// InsufficientData when `controlled` is empty.
double attribute_mse(std::span<const double> targets, std::span<const double> achieved,
                     std::span<const int> controlled);
// Both spans already restricted to the controlled subset.
double attribute_mse(std::span<const double> targets, std::span<const double> achieved);

enum class EvalMode {
  kModel,      // conditioned generation
  kVanilla,    // all attributes masked
  kReference,  // emit the held-out text itself
};

std::string_view eval_mode_key(EvalMode m);

struct EvalRequest {
  const Checkpoint* ckpt = nullptr;                 // unused in reference mode
  const std::vector<CorpusRecord>* targets = nullptr;  // held-out records
  AttributeSchema schema;
  NormStats norm;
  Lexicons lex;
  ExtractOptions extract;
  EvalMode mode = EvalMode::kModel;
  int n_samples = 2000;
  int k_controlled = 1;
  // Fixed controlled subset; when empty a subset of size k_controlled is
  // drawn per sample.
  std::vector<std::string> controlled_ids;
  DecodeParams decode;
  std::uint64_t seed = 1;
  int workers = 1;
};

struct SampleResult {
  std::size_t record = 0;
  std::vector<int> controlled;
  std::vector<double> target_raw;    // controlled entries only
  std::vector<double> target_norm;
  std::string text;
  bool degenerate = false;
  std::vector<double> achieved_raw;  // controlled entries only
  std::vector<double> achieved_norm;
  std::vector<double> sq_err_norm;
  std::vector<double> sq_err_raw;
  double mse_norm = 0.0;
  double mse_raw = 0.0;
};

struct EvalReport {
  std::string mode;
  std::uint64_t seed = 0;
  int k_controlled = 0;
  std::vector<SampleResult> samples;
  int n_scored = 0;
  int degenerate_count = 0;
  double mse_norm_mean = 0.0;
  double mse_norm_std = 0.0;  // across samples
  double mse_raw_mean = 0.0;
  std::vector<double> per_attribute_raw_sq;  // schema order, mean raw squared error (NaN if never controlled)
  std::optional<double> fluency_rate;

  nlohmann::json to_json(const AttributeSchema& schema) const;
};

// Recomputes the aggregates from the per-sample records.
void finalize(EvalReport& r, std::size_t k);

EvalReport run_eval(const EvalRequest& req);

// --- aggregate files --------------------------------------------------------

struct ReportRow {
  std::string strategy;
  std::string integration;
  std::string seed;  // seed value, or "all" for the across-seed summary
  int k_controlled = 0;
  double mse_norm_mean = 0.0;
  double mse_norm_std = 0.0;
  double mse_raw_mean = 0.0;
  int degenerate_count = 0;
  std::optional<double> fluency_rate;
  std::string error;  // non-empty when the cell failed
};

// Per-seed rows followed by one "all" row (std across seed means).
std::vector<ReportRow> summarize(const std::string& strategy, const std::string& integration,
                                 const std::vector<EvalReport>& per_seed);

void write_report_csv(const std::filesystem::path& path, const std::vector<ReportRow>& rows);
std::vector<ReportRow> read_report_csv(const std::filesystem::path& path);

// --- sweep ----------------------------------------------------------------

struct NamedCheckpoint {
  std::string label;
  const Checkpoint* ckpt = nullptr;
};

struct SweepCell {
  std::string strategy;
  int count = 0;
  std::uint64_t seed = 0;
  std::optional<double> mse;  // empty: gap (count > k, failure, missing seed)
  std::string note;
};

struct SweepConfig {
  std::vector<int> counts = {1, 2, 4, 8, 16};
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  int n_samples = 200;
  DecodeParams decode;
  int workers = 1;
};

std::vector<SweepCell> sweep(std::span<const NamedCheckpoint> models,
                             const std::vector<CorpusRecord>& test, const Lexicons& lex,
                             const SweepConfig& cfg);

// sweep.csv: one row per (strategy, count, seed), "NA" marks gaps.
// fig2.csv: strategy, count, mean, std, n_seeds. fig2.svg: line chart.
void write_sweep(const std::filesystem::path& dir, const std::vector<SweepCell>& cells);

// --- pairwise ---------------------------------------------------------------

struct PairwiseMatrix {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> raw;   // k x k
  std::vector<std::vector<double>> norm;  // row-wise min-max to [0, 1]
  std::vector<bool> constant_row;         // flagged rows normalize to 0
};

// Row-wise min-max; constant rows become 0 and are flagged.
void normalize_rows(PairwiseMatrix& m);

// Cell (i, j): normalized MSE on attribute i when controlling {i, j};
// diagonal controls {i} alone.
PairwiseMatrix pairwise(const Checkpoint& ckpt, const std::vector<CorpusRecord>& test,
                        const Lexicons& lex, int samples_per_pair, const DecodeParams& decode,
                        std::uint64_t seed, int workers = 1);

void write_pairwise(const std::filesystem::path& dir, const PairwiseMatrix& m);

// --- ablation -------------------------------------------------------------

struct AblationConfig {
  std::vector<MaskingStrategy> strategies;
  std::vector<IntegrationMode> modes = {IntegrationMode::kSos};
  ModelConfig model;
  OptimConfig optim;
  std::vector<std::uint64_t> seeds = {1, 2, 3};  // evaluation seeds
  int k_controlled = 1;
  int n_samples = 500;
  DecodeParams decode;
  int workers = 1;
  std::filesystem::path out_dir;  // checkpoints and logs per cell; empty: none saved
};

struct AblationResult {
  std::vector<ReportRow> rows;  // only the "all" summary per cell
  std::string corpus_checksum;
};

AblationResult ablate(const PreparedCorpus& corpus, const std::filesystem::path& corpus_dir,
                      const Lexicons& lex, const AblationConfig& cfg);

}  // namespace linggen
