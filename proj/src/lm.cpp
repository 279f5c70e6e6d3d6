#include "linggen/lm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "linggen/errors.hpp"

namespace linggen {

std::vector<int> lm_inputs(std::span<const int> tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size() + 1);
  ids.push_back(Vocabulary::kSos);
  ids.insert(ids.end(), tokens.begin(), tokens.end());
  return ids;
}

template <typename S>
double lm_loss(const Transformer<S>& model, std::span<const Example> batch, ParamSet<S>* grads,
               Rng* dropout_rng, std::vector<std::vector<double>>* dvalues) {
  if (batch.empty()) throw Error(ErrorKind::kEmptyBatch, "loss over an empty batch");
  std::size_t n_targets = 0;
  for (const auto& ex : batch) n_targets += ex.tokens.size() + 1;
  const S inv_n = S(1) / static_cast<S>(n_targets);
  const auto& blocks = model.blocks();
  if (dvalues) dvalues->assign(batch.size(), {});

  double total = 0.0;
  ForwardCache<S> cache;
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& ex = batch[b];
    const auto ids = lm_inputs(ex.tokens);
    const RowVec<S> g = model.encode(ex.attrs, ex.mask);
    const RowMat<S> logits = model.forward(ids, &g, grads ? &cache : nullptr, dropout_rng);
    const auto T = logits.rows();
    RowMat<S> dlogits;
    if (grads) dlogits.resize(T, logits.cols());
    for (Eigen::Index t = 0; t < T; ++t) {
      const int target = t + 1 < T ? ex.tokens[static_cast<std::size_t>(t)] : Vocabulary::kEos;
      const S mx = logits.row(t).maxCoeff();
      const S sum = (logits.row(t).array() - mx).exp().sum();
      const S lse = mx + std::log(sum);
      total -= static_cast<double>(logits(t, target) - lse);
      if (grads) {
        dlogits.row(t) = ((logits.row(t).array() - lse).exp() * inv_n).matrix();
        dlogits(t, target) -= inv_n;
      }
    }
    if (grads) {
      RowVec<S> dg = RowVec<S>::Zero(model.config().d_model);
      model.backward(cache, dlogits, *grads, &dg);
      std::span<double> dv;
      if (dvalues) {
        (*dvalues)[b].assign(ex.attrs.size(), 0.0);
        dv = (*dvalues)[b];
      }
      encode_attributes_backward<S>(ex.attrs, ex.mask, model.params().block(blocks.enc_w), dg,
                                    grads->block(blocks.enc_w), grads->block(blocks.enc_c),
                                    grads->block(blocks.enc_types), dv);
    }
  }
  return total / static_cast<double>(n_targets);
}

template double lm_loss<float>(const Transformer<float>&, std::span<const Example>, ParamSet<float>*,
                               Rng*, std::vector<std::vector<double>>*);
template double lm_loss<double>(const Transformer<double>&, std::span<const Example>,
                                ParamSet<double>*, Rng*, std::vector<std::vector<double>>*);

// --- optimizer ------------------------------------------------------------

nlohmann::json OptimConfig::to_json() const {
  return {{"steps", steps},         {"batch_size", batch_size}, {"lr", lr},
          {"beta1", beta1},         {"beta2", beta2},           {"eps", eps},
          {"warmup", warmup},       {"cosine_decay", cosine_decay}, {"grad_clip", grad_clip},
          {"eval_every", eval_every}, {"val_max", val_max},     {"seed", seed}};
}

OptimConfig OptimConfig::from_json(const nlohmann::json& j) {
  OptimConfig c;
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr = j.value("lr", c.lr);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.eps = j.value("eps", c.eps);
  c.warmup = j.value("warmup", c.warmup);
  c.cosine_decay = j.value("cosine_decay", c.cosine_decay);
  c.grad_clip = j.value("grad_clip", c.grad_clip);
  c.eval_every = j.value("eval_every", c.eval_every);
  c.val_max = j.value("val_max", c.val_max);
  c.seed = j.value("seed", c.seed);
  return c;
}

Adam::Adam(std::size_t n, const OptimConfig& cfg) : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

double Adam::lr_at(long step) const {
  if (cfg_.warmup > 0 && step < cfg_.warmup) {
    return cfg_.lr * static_cast<double>(step + 1) / cfg_.warmup;
  }
  if (!cfg_.cosine_decay || cfg_.steps <= cfg_.warmup) return cfg_.lr;
  const double progress =
      std::min(1.0, static_cast<double>(step - cfg_.warmup) / (cfg_.steps - cfg_.warmup));
  return cfg_.lr * (0.1 + 0.9 * 0.5 * (1.0 + std::cos(progress * 3.14159265358979323846)));
}

void Adam::step(std::span<float> params, std::span<const float> grads) {
  const double lr = lr_at(t_);
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  double scale = 1.0;
  if (cfg_.grad_clip > 0) {
    double sq = 0.0;
    for (float g : grads) sq += static_cast<double>(g) * g;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.grad_clip) scale = cfg_.grad_clip / norm;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] * scale;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
    const double update = lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.eps);
    params[i] = static_cast<float>(params[i] - update);
  }
}

void write_log_csv(const std::filesystem::path& path, const std::vector<LogRow>& log) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << "step,train_loss,val_loss\n";
  out.precision(9);
  for (const auto& r : log) out << r.step << ',' << r.train_loss << ',' << r.val_loss << '\n';
}

// --- training -------------------------------------------------------------

double lm_eval_loss(const Transformer<float>& model, const std::vector<CorpusRecord>& records,
                    const MaskingStrategy& strategy, std::uint64_t seed, int max_records) {
  const auto n = std::min(records.size(), static_cast<std::size_t>(std::max(max_records, 1)));
  if (n == 0) throw Error(ErrorKind::kEmptySplit, "validation split is empty");
  Rng rng(Rng::splitmix64(seed ^ 0x7661'6c69'6400ULL));
  const int k = model.config().n_attributes;
  std::vector<Example> batch;
  batch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    batch.push_back({records[i].token_ids, records[i].attrs_norm, draw_mask(rng, k, strategy)});
  }
  return lm_loss<float>(model, batch);
}

TrainResult train_lm(const PreparedCorpus& corpus, ModelConfig model_cfg, const OptimConfig& opt,
                     const MaskingStrategy& strategy) {
  validate(strategy);
  if (corpus.train.empty()) throw Error(ErrorKind::kEmptySplit, "train split is empty");
  if (corpus.val.empty()) throw Error(ErrorKind::kEmptySplit, "validation split is empty");
  if (opt.batch_size < 1 || opt.steps < 1) throw Error(ErrorKind::kConfig, "steps and batch_size must be positive");
  model_cfg.vocab_size = corpus.vocab.size();
  model_cfg.n_attributes = static_cast<int>(corpus.schema.size());
  model_cfg.head = HeadKind::kTokens;
  for (const auto& r : corpus.train) {
    if (static_cast<int>(r.token_ids.size()) + 1 > model_cfg.max_len) {
      throw Error(ErrorKind::kSequenceTooLong, "training record longer than max_len");
    }
  }

  Rng init_rng(opt.seed);
  Rng data_rng(Rng::splitmix64(opt.seed + 1));
  Rng drop_rng(Rng::splitmix64(opt.seed + 2));

  Transformer<float> model(model_cfg);
  model.init(init_rng);
  auto grads = model.make_grads();
  Adam adam(model.params().size(), opt);
  const int k = model_cfg.n_attributes;

  std::vector<std::size_t> order(corpus.train.size());
  std::vector<MaskDraw> masks(corpus.train.size());
  std::size_t cursor = order.size();
  auto new_epoch = [&] {
    std::iota(order.begin(), order.end(), std::size_t{0});
    data_rng.shuffle(order);
    for (auto& m : masks) m = draw_mask(data_rng, k, strategy);
    cursor = 0;
  };

  TrainResult result;
  std::vector<float> best = std::vector<float>(model.params().flat().begin(), model.params().flat().end());
  double best_val = std::numeric_limits<double>::infinity();
  long best_step = 0;
  double running = 0.0;
  int running_n = 0;
  std::vector<Example> batch;

  for (long step = 1; step <= opt.steps; ++step) {
    batch.clear();
    while (static_cast<int>(batch.size()) < opt.batch_size) {
      if (cursor >= order.size()) new_epoch();
      const auto& r = corpus.train[order[cursor]];
      batch.push_back({r.token_ids, r.attrs_norm, masks[order[cursor]]});
      ++cursor;
    }
    grads.zero();
    const double loss = lm_loss<float>(model, batch, &grads, &drop_rng);
    if (!std::isfinite(loss)) {
      throw Error(ErrorKind::kTrainingDiverged,
                  "non-finite training loss at step " + std::to_string(step) + " (lr " +
                      std::to_string(adam.lr_at(step - 1)) + ")");
    }
    adam.step(model.params().flat(), grads.flat());
    running += loss;
    ++running_n;

    if (step % opt.eval_every == 0 || step == opt.steps) {
      const double val = lm_eval_loss(model, corpus.val, strategy, opt.seed, opt.val_max);
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
  result.ckpt.role = "lm";
  result.ckpt.model = std::move(model);
  result.ckpt.vocab = corpus.vocab;
  result.ckpt.schema = corpus.schema;
  result.ckpt.norm = corpus.norm;
  result.ckpt.step = best_step;
  result.ckpt.val_loss = best_val;
  result.ckpt.meta = {{"strategy", strategy_key(strategy)}, {"optim", opt.to_json()}};
  if (const auto* p = std::get_if<ParetoMasking>(&strategy)) result.ckpt.meta["b"] = p->cfg.b;
  if (const auto* f = std::get_if<FixedRateMasking>(&strategy)) result.ckpt.meta["rate"] = f->rate;
  if (const auto* d = std::get_if<DropoutMasking>(&strategy)) result.ckpt.meta["p"] = d->p;
  return result;
}

// --- generation -----------------------------------------------------------

nlohmann::json DecodeParams::to_json() const {
  return {{"temperature", temperature}, {"top_p", top_p}, {"max_tokens", max_tokens}};
}

int sample_token(std::span<const float> logits, const DecodeParams& p, Rng& rng) {
  const int V = static_cast<int>(logits.size());
  auto allowed = [](int id) {
    return id >= Vocabulary::kSpecialCount || id == Vocabulary::kEos;
  };
  if (p.temperature <= 0.0) {
    int best = -1;
    for (int i = 0; i < V; ++i) {
      if (allowed(i) && (best < 0 || logits[static_cast<std::size_t>(i)] > logits[static_cast<std::size_t>(best)])) {
        best = i;
      }
    }
    return best;
  }
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < V; ++i) {
    if (allowed(i)) mx = std::max(mx, static_cast<double>(logits[static_cast<std::size_t>(i)]));
  }
  std::vector<std::pair<double, int>> probs;
  double sum = 0.0;
  for (int i = 0; i < V; ++i) {
    if (!allowed(i)) continue;
    const double e = std::exp((logits[static_cast<std::size_t>(i)] - mx) / p.temperature);
    probs.emplace_back(e, i);
    sum += e;
  }
  std::stable_sort(probs.begin(), probs.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  const double cutoff = std::clamp(p.top_p, 0.0, 1.0) * sum;
  double kept = 0.0;
  std::size_t n = 0;
  while (n < probs.size()) {
    kept += probs[n].first;
    ++n;
    if (kept >= cutoff) break;
  }
  const double u = rng.uniform() * kept;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += probs[i].first;
    if (u < acc) return probs[i].second;
  }
  return probs[n - 1].second;
}

Generation generate_conditioned(const Checkpoint& ckpt, std::span<const double> values,
                                const MaskDraw& mask, const DecodeParams& p, Rng& rng) {
  const auto& model = ckpt.model;
  const int max_tokens = p.max_tokens < 0 ? model.config().max_len - 1
                                          : std::min(p.max_tokens, model.config().max_len - 1);
  const RowVec<float> g = model.encode(values, mask);
  auto state = model.start_decode(&g);
  RowVec<float> logits = model.decode_step(state, Vocabulary::kSos);
  Generation out;
  while (static_cast<int>(out.ids.size()) < max_tokens) {
    const int tok = sample_token(std::span<const float>(logits.data(), static_cast<std::size_t>(logits.size())), p, rng);
    if (tok == Vocabulary::kEos) {
      out.hit_eos = true;
      break;
    }
    out.ids.push_back(tok);
    if (static_cast<int>(out.ids.size()) == max_tokens) break;
    logits = model.decode_step(state, tok);
  }
  const auto toks = ckpt.vocab.decode(out.ids);
  out.text = detokenize(toks);
  return out;
}

Generation generate(const Checkpoint& ckpt, const std::map<std::string, double>& targets,
                    const DecodeParams& p, Rng& rng) {
  const auto k = ckpt.schema.size();
  std::vector<double> values(k, 0.0);
  std::vector<int> controlled;
  for (const auto& [id, raw] : targets) {
    const auto i = ckpt.schema.require(id);
    values[i] = (raw - ckpt.norm.mean[i]) / ckpt.norm.stddev[i];
    controlled.push_back(static_cast<int>(i));
  }
  return generate_conditioned(ckpt, values, mask_complement(static_cast<int>(k), controlled), p, rng);
}

Generation generate_vanilla(const Checkpoint& ckpt, const DecodeParams& p, Rng& rng) {
  return generate(ckpt, {}, p, rng);
}

}  // namespace linggen
