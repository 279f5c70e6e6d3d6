#pragma once

#include <string_view>
#include <vector>

#include "linggen/checkpoint.hpp"
#include "linggen/datakit.hpp"
#include "linggen/lm.hpp"

namespace linggen {

// Encoder input: [SOS, tokens..., EOS]. PAD ids are dropped before the pass,
// so they never reach attention or pooling.
std::vector<int> disc_inputs(std::span<const int> tokens);

// Mean over examples of ||prediction - gold||^2 / k. With grads the
// gradient of that mean is accumulated.
template <typename S>
double disc_loss(const Transformer<S>& model, std::span<const std::span<const int>> tokens,
                 std::span<const std::span<const double>> gold, ParamSet<S>* grads = nullptr,
                 Rng* dropout_rng = nullptr);

TrainResult train_discriminator(const PreparedCorpus& corpus, ModelConfig model_cfg,
                                const OptimConfig& opt);

// Normalized-space prediction for token ids (PAD allowed anywhere).
std::vector<double> predict_ids(const Checkpoint& ckpt, std::span<const int> ids);
// Throws EmptyDocument when the text has no words.
std::vector<double> predict(const Checkpoint& ckpt, std::string_view text);

struct CorrelationStat {
  double r = 0.0;
  bool defined = true;  // false when either column is constant
};

double pearson(std::span<const double> x, std::span<const double> y, bool* defined = nullptr);

struct DiscEval {
  double mse = 0.0;
  std::vector<CorrelationStat> per_attribute;
  double macro_r = 0.0;  // over defined columns
  int undefined = 0;
};

// Scores predictions against gold rows (both normalized). Needs >= 2 rows.
DiscEval score_predictions(const std::vector<std::vector<double>>& pred,
                           const std::vector<std::vector<double>>& gold);

DiscEval evaluate_discriminator(const Checkpoint& ckpt, const std::vector<CorpusRecord>& records);

}  // namespace linggen
