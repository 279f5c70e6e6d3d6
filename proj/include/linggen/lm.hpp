#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "linggen/checkpoint.hpp"
#include "linggen/datakit.hpp"
#include "linggen/pmask.hpp"
#include "linggen/transformer.hpp"

namespace linggen {

// One training sequence: word/punctuation ids without start or end token,
// its normalized attributes, and the attribute mask for this pass.
struct Example {
  std::span<const int> tokens;
  std::span<const double> attrs;
  MaskDraw mask;
};

// Input ids [SOS, tokens...] and targets [tokens..., EOS].
std::vector<int> lm_inputs(std::span<const int> tokens);

// Mean next-token cross entropy (nats/token) over the batch. With grads,
// accumulates d(mean loss)/d(params). With dvalues, receives
// d(mean loss)/d(attrs) per example (masked entries exactly 0).
template <typename S>
double lm_loss(const Transformer<S>& model, std::span<const Example> batch,
               ParamSet<S>* grads = nullptr, Rng* dropout_rng = nullptr,
               std::vector<std::vector<double>>* dvalues = nullptr);

struct OptimConfig {
  int steps = 2000;
  int batch_size = 32;
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int warmup = 100;
  bool cosine_decay = false;  // decay to 10% of lr after warmup
  double grad_clip = 1.0;     // global norm; <= 0 disables
  int eval_every = 200;
  int val_max = 512;          // validation records used per evaluation
  std::uint64_t seed = 1;

  nlohmann::json to_json() const;
  static OptimConfig from_json(const nlohmann::json& j);
};

struct LogRow {
  long step = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& log);

class Adam {
 public:
  Adam(std::size_t n, const OptimConfig& cfg);
  double lr_at(long step) const;
  void step(std::span<float> params, std::span<const float> grads);

 private:
  OptimConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

struct TrainResult {
  Checkpoint ckpt;
  std::vector<LogRow> log;
};

// Teacher-forced training with per-sample masks redrawn every epoch and
// best-validation checkpoint selection. Throws TrainingDiverged on a
// non-finite loss.
TrainResult train_lm(const PreparedCorpus& corpus, ModelConfig model_cfg, const OptimConfig& opt,
                     const MaskingStrategy& strategy);

// Validation loss with masks drawn from `strategy` using a fixed seed.
double lm_eval_loss(const Transformer<float>& model, const std::vector<CorpusRecord>& records,
                    const MaskingStrategy& strategy, std::uint64_t seed, int max_records);

// --- generation -----------------------------------------------------------

struct DecodeParams {
  double temperature = 1.0;  // 0 selects greedy decoding
  double top_p = 0.95;
  int max_tokens = -1;       // -1: up to max_len - 1

  nlohmann::json to_json() const;
};

struct Generation {
  std::string text;
  std::vector<int> ids;
  bool hit_eos = false;

  bool empty() const { return ids.empty(); }
};

// Picks the next token from a logits row. Specials other than EOS are never
// emitted.
int sample_token(std::span<const float> logits, const DecodeParams& p, Rng& rng);

// values are normalized; masked entries are ignored.
Generation generate_conditioned(const Checkpoint& ckpt, std::span<const double> values,
                                const MaskDraw& mask, const DecodeParams& p, Rng& rng);

// targets in raw attribute units, keyed by schema id. Attributes not listed
// are masked. Throws UnknownAttributeId.
Generation generate(const Checkpoint& ckpt, const std::map<std::string, double>& targets,
                    const DecodeParams& p, Rng& rng);

// All attributes masked.
Generation generate_vanilla(const Checkpoint& ckpt, const DecodeParams& p, Rng& rng);

}  // namespace linggen
