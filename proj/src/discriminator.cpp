#include "linggen/discriminator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "linggen/errors.hpp"

namespace linggen {

std::vector<int> disc_inputs(std::span<const int> tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 2);
  ids.push_back(Vocabulary::kSos);
  for (int t : tokens) {
    if (t != Vocabulary::kPad) ids.push_back(t);
  }
  ids.push_back(Vocabulary::kEos);
  return ids;
}

template <typename S>
double disc_loss(const Transformer<S>& model, std::span<const std::span<const int>> tokens,
                 std::span<const std::span<const double>> gold, ParamSet<S>* grads,
                 Rng* dropout_rng) {
  if (tokens.empty()) throw Error(ErrorKind::kEmptyBatch, "loss over an empty batch");
  if (tokens.size() != gold.size()) throw Error(ErrorKind::kLengthMismatch, "tokens/gold size");
  const int k = model.config().n_attributes;
  const S inv = S(1) / static_cast<S>(tokens.size() * static_cast<std::size_t>(k));
  double total = 0.0;
  ForwardCache<S> cache;
  for (std::size_t b = 0; b < tokens.size(); ++b) {
    const auto ids = disc_inputs(tokens[b]);
    const RowMat<S> out = model.forward(ids, nullptr, grads ? &cache : nullptr, dropout_rng);
    RowMat<S> dout(1, k);
    for (int i = 0; i < k; ++i) {
      const S diff = out(0, i) - static_cast<S>(gold[b][static_cast<std::size_t>(i)]);
      total += static_cast<double>(diff) * static_cast<double>(diff);
      dout(0, i) = S(2) * diff * inv;
    }
    if (grads) model.backward(cache, dout, *grads);
  }
  return total / (static_cast<double>(tokens.size()) * k);
}

template double disc_loss<float>(const Transformer<float>&, std::span<const std::span<const int>>,
                                 std::span<const std::span<const double>>, ParamSet<float>*, Rng*);
template double disc_loss<double>(const Transformer<double>&, std::span<const std::span<const int>>,
                                  std::span<const std::span<const double>>, ParamSet<double>*, Rng*);

namespace {

double disc_eval_loss(const Transformer<float>& model, const std::vector<CorpusRecord>& records,
                      int max_records) {
  const auto n = std::min(records.size(), static_cast<std::size_t>(std::max(max_records, 1)));
  std::vector<std::span<const int>> toks;
  std::vector<std::span<const double>> gold;
  for (std::size_t i = 0; i < n; ++i) {
    toks.emplace_back(records[i].token_ids);
    gold.emplace_back(records[i].attrs_norm);
  }
  return disc_loss<float>(model, toks, gold);
}

}  // namespace

TrainResult train_discriminator(const PreparedCorpus& corpus, ModelConfig model_cfg,
                                const OptimConfig& opt) {
  if (corpus.train.empty()) throw Error(ErrorKind::kEmptySplit, "train split is empty");
  if (corpus.val.empty()) throw Error(ErrorKind::kEmptySplit, "validation split is empty");
  if (opt.batch_size < 1 || opt.steps < 1) throw Error(ErrorKind::kConfig, "steps and batch_size must be positive");
  model_cfg.vocab_size = corpus.vocab.size();
  model_cfg.n_attributes = static_cast<int>(corpus.schema.size());
  model_cfg.head = HeadKind::kRegression;
  for (const auto& r : corpus.train) {
    if (static_cast<int>(r.token_ids.size()) + 2 > model_cfg.max_len) {
      throw Error(ErrorKind::kSequenceTooLong, "training record longer than encoder max_len");
    }
  }

  Rng init_rng(opt.seed);
  Rng data_rng(Rng::splitmix64(opt.seed + 1));
  Rng drop_rng(Rng::splitmix64(opt.seed + 2));
  Transformer<float> model(model_cfg);
  model.init(init_rng);
  auto grads = model.make_grads();
  Adam adam(model.params().size(), opt);

  std::vector<std::size_t> order(corpus.train.size());
  std::size_t cursor = order.size();
  TrainResult result;
  std::vector<float> best(model.params().flat().begin(), model.params().flat().end());
  double best_val = std::numeric_limits<double>::infinity();
  long best_step = 0;
  double running = 0.0;
  int running_n = 0;
  std::vector<std::span<const int>> toks;
  std::vector<std::span<const double>> gold;

  for (long step = 1; step <= opt.steps; ++step) {
    toks.clear();
    gold.clear();
    while (static_cast<int>(toks.size()) < opt.batch_size) {
      if (cursor >= order.size()) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        data_rng.shuffle(order);
        cursor = 0;
      }
      const auto& r = corpus.train[order[cursor++]];
      toks.emplace_back(r.token_ids);
      gold.emplace_back(r.attrs_norm);
    }
    grads.zero();
    const double loss = disc_loss<float>(model, toks, gold, &grads, &drop_rng);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::kTrainingDiverged,
                  "non-finite discriminator loss at step " + std::to_string(step));
    }
    adam.step(model.params().flat(), grads.flat());
    running += loss;
    ++running_n;
    if (step % opt.eval_every == 0 || step == opt.steps) {
      const double val = disc_eval_loss(model, corpus.val, opt.val_max);
      result.log.push_back({step, running / running_n, val});
      running = 0.0;
      running_n = 0;
      if (val < best_val) {
        best_val = val;
        best_step = step;
        std::copy(model.params().flat().begin(), model.params().flat().end(), best.begin());
      }
    }
  }
  std::copy(best.begin(), best.end(), model.params().flat().begin());
  result.ckpt.role = "discriminator";
  result.ckpt.model = std::move(model);
  result.ckpt.vocab = corpus.vocab;
  result.ckpt.schema = corpus.schema;
  result.ckpt.norm = corpus.norm;
  result.ckpt.step = best_step;
  result.ckpt.val_loss = best_val;
  result.ckpt.meta = {{"optim", opt.to_json()}};
  return result;
}

std::vector<double> predict_ids(const Checkpoint& ckpt, std::span<const int> ids) {
  if (ckpt.role != "discriminator") throw Error(ErrorKind::kConfig, "checkpoint is not a discriminator");
  const auto inputs = disc_inputs(ids);
  const RowMat<float> out = ckpt.model.forward(inputs, nullptr);
  return std::vector<double>(out.data(), out.data() + out.size());
}

std::vector<double> predict(const Checkpoint& ckpt, std::string_view text) {
  const auto toks = lm_tokenize(text);
  const bool has_word = std::any_of(toks.begin(), toks.end(), [](const auto& t) { return is_word_token(t); });
  if (!has_word) throw Error(ErrorKind::kEmptyDocument, "document has no words");
  auto ids = ckpt.vocab.encode(toks);
  const auto limit = static_cast<std::size_t>(ckpt.model.config().max_len - 2);
  if (ids.size() > limit) ids.resize(limit);
  return predict_ids(ckpt, ids);
}

double pearson(std::span<const double> x, std::span<const double> y, bool* defined) {
  if (x.size() != y.size()) throw Error(ErrorKind::kLengthMismatch, "pearson: length mismatch");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  const bool ok = sxx > 1e-12 * n && syy > 1e-12 * n;
  if (defined) *defined = ok;
  return ok ? sxy / std::sqrt(sxx * syy) : 0.0;
}

DiscEval score_predictions(const std::vector<std::vector<double>>& pred,
                           const std::vector<std::vector<double>>& gold) {
  if (pred.size() != gold.size()) throw Error(ErrorKind::kLengthMismatch, "prediction/gold count");
  if (pred.size() < 2) throw Error(ErrorKind::kInsufficientData, "need at least 2 samples");
  const std::size_t k = gold.front().size();
  DiscEval e;
  double sq = 0.0;
  for (std::size_t s = 0; s < pred.size(); ++s) {
    if (pred[s].size() != k || gold[s].size() != k) throw Error(ErrorKind::kLengthMismatch, "ragged rows");
    for (std::size_t i = 0; i < k; ++i) sq += (pred[s][i] - gold[s][i]) * (pred[s][i] - gold[s][i]);
  }
  e.mse = sq / static_cast<double>(pred.size() * k);
  double r_sum = 0.0;
  int r_n = 0;
  std::vector<double> col_p(pred.size()), col_g(pred.size());
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t s = 0; s < pred.size(); ++s) {
      col_p[s] = pred[s][i];
      col_g[s] = gold[s][i];
    }
    CorrelationStat c;
    c.r = pearson(col_p, col_g, &c.defined);
    if (c.defined) {
      r_sum += c.r;
      ++r_n;
    } else {
      ++e.undefined;
    }
    e.per_attribute.push_back(c);
  }
  e.macro_r = r_n > 0 ? r_sum / r_n : 0.0;
  return e;
}

DiscEval evaluate_discriminator(const Checkpoint& ckpt, const std::vector<CorpusRecord>& records) {
  if (records.size() < 2) throw Error(ErrorKind::kInsufficientData, "need at least 2 samples");
  std::vector<std::vector<double>> pred, gold;
  for (const auto& r : records) {
    pred.push_back(predict_ids(ckpt, r.token_ids));
    gold.push_back(r.attrs_norm);
  }
  return score_predictions(pred, gold);
}

}  // namespace linggen
