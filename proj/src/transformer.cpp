#include "linggen/transformer.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace linggen {

namespace {

constexpr double kLnEps = 1e-5;

std::string_view head_key(HeadKind h) { return h == HeadKind::kTokens ? "tokens" : "regression"; }

template <typename S>
void layer_norm(const RowMat<S>& x, const Eigen::Ref<const RowVec<S>>& gain,
                const Eigen::Ref<const RowVec<S>>& bias, RowMat<S>& xhat, std::vector<S>& rstd,
                RowMat<S>& y) {
  const auto rows = x.rows();
  const auto d = static_cast<S>(x.cols());
  xhat.resize(rows, x.cols());
  y.resize(rows, x.cols());
  rstd.resize(static_cast<std::size_t>(rows));
  for (Eigen::Index t = 0; t < rows; ++t) {
    const S mu = x.row(t).sum() / d;
    const S var = (x.row(t).array() - mu).square().sum() / d;
    const S r = S(1) / std::sqrt(var + static_cast<S>(kLnEps));
    rstd[static_cast<std::size_t>(t)] = r;
    xhat.row(t) = (x.row(t).array() - mu) * r;
    y.row(t) = xhat.row(t).cwiseProduct(gain) + bias;
  }
}

// dx for y = xhat * gain + bias; accumulates dgain/dbias.
template <typename S, typename GMap>
RowMat<S> layer_norm_backward(const RowMat<S>& dy, const RowMat<S>& xhat,
                              const std::vector<S>& rstd,
                              const Eigen::Ref<const RowVec<S>>& gain, GMap&& dgain, GMap&& dbias) {
  const auto rows = dy.rows();
  const auto d = static_cast<S>(dy.cols());
  RowMat<S> dx(rows, dy.cols());
  for (Eigen::Index t = 0; t < rows; ++t) {
    dgain += dy.row(t).cwiseProduct(xhat.row(t));
    dbias += dy.row(t);
    const RowVec<S> dxhat = dy.row(t).cwiseProduct(gain);
    const S mean_d = dxhat.sum() / d;
    const S mean_dx = dxhat.dot(xhat.row(t)) / d;
    dx.row(t) = (dxhat.array() - mean_d - xhat.row(t).array() * mean_dx) *
                rstd[static_cast<std::size_t>(t)];
  }
  return dx;
}

template <typename S>
constexpr S gelu_c() {
  return static_cast<S>(0.7978845608028654);  // sqrt(2 / pi)
}

template <typename S>
S gelu(S u) {
  const S inner = gelu_c<S>() * (u + S(0.044715) * u * u * u);
  return S(0.5) * u * (S(1) + std::tanh(inner));
}

template <typename S>
S gelu_grad(S u) {
  const S inner = gelu_c<S>() * (u + S(0.044715) * u * u * u);
  const S t = std::tanh(inner);
  return S(0.5) * (S(1) + t) +
         S(0.5) * u * (S(1) - t * t) * gelu_c<S>() * (S(1) + S(3) * S(0.044715) * u * u);
}

template <typename S>
void softmax_rows(RowMat<S>& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const S mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp();
    m.row(r) /= m.row(r).sum();
  }
}

template <typename S>
RowMat<S> dropout_mask(Eigen::Index rows, Eigen::Index cols, double p, Rng& rng) {
  RowMat<S> mask(rows, cols);
  const S keep = static_cast<S>(1.0 / (1.0 - p));
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.bernoulli(p) ? S(0) : keep;
  }
  return mask;
}

}  // namespace

// --- config ---------------------------------------------------------------

std::string_view mode_key(IntegrationMode m) {
  switch (m) {
    case IntegrationMode::kSos: return "sos";
    case IntegrationMode::kAll: return "all";
    case IntegrationMode::kOutput: return "output";
    case IntegrationMode::kLogits: return "logits";
  }
  return "sos";
}

IntegrationMode parse_mode(std::string_view key) {
  if (key == "sos") return IntegrationMode::kSos;
  if (key == "all") return IntegrationMode::kAll;
  if (key == "output") return IntegrationMode::kOutput;
  if (key == "logits") return IntegrationMode::kLogits;
  throw Error(ErrorKind::kConfig, "unknown integration mode '" + std::string(key) + "'");
}

void ModelConfig::validate() const {
  if (d_model <= 0 || n_layers < 0 || n_heads <= 0 || ffn_size <= 0) {
    throw Error(ErrorKind::kConfig, "model dimensions must be positive");
  }
  if (d_model % n_heads != 0) throw Error(ErrorKind::kConfig, "d_model must be divisible by n_heads");
  if (max_len < 2) throw Error(ErrorKind::kConfig, "max_len must be at least 2");
  if (vocab_size <= 0) throw Error(ErrorKind::kConfig, "vocab_size must be positive");
  if (n_attributes < 0) throw Error(ErrorKind::kConfig, "n_attributes must be non-negative");
  if (head == HeadKind::kRegression && n_attributes < 1) {
    throw Error(ErrorKind::kConfig, "regression head needs at least one attribute");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error(ErrorKind::kConfig, "dropout outside [0, 1)");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"d_model", d_model},       {"n_layers", n_layers},
          {"n_heads", n_heads},       {"ffn_size", ffn_size},
          {"max_len", max_len},       {"vocab_size", vocab_size},
          {"n_attributes", n_attributes}, {"integration_mode", mode_key(mode)},
          {"dropout", dropout},       {"head", head_key(head)}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.ffn_size = j.value("ffn_size", c.ffn_size);
  c.max_len = j.value("max_len", c.max_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.n_attributes = j.value("n_attributes", c.n_attributes);
  c.mode = parse_mode(j.value("integration_mode", std::string("sos")));
  c.dropout = j.value("dropout", c.dropout);
  c.head = j.value("head", std::string("tokens")) == "regression" ? HeadKind::kRegression
                                                                   : HeadKind::kTokens;
  return c;
}

std::shared_ptr<Layout> build_layout(const ModelConfig& cfg, ModelBlocks& b) {
  auto layout = std::make_shared<Layout>();
  const int d = cfg.d_model;
  b.tok_emb = layout->add("tok_emb", cfg.vocab_size, d);
  b.pos_emb = layout->add("pos_emb", cfg.max_len, d);
  b.layers.clear();
  for (int l = 0; l < cfg.n_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    LayerBlocks lb{};
    lb.ln1_g = layout->add(p + "ln1.gain", 1, d);
    lb.ln1_b = layout->add(p + "ln1.bias", 1, d);
    lb.wqkv = layout->add(p + "attn.wqkv", d, 3 * d);
    lb.bqkv = layout->add(p + "attn.bqkv", 1, 3 * d);
    lb.wo = layout->add(p + "attn.wo", d, d);
    lb.bo = layout->add(p + "attn.bo", 1, d);
    lb.ln2_g = layout->add(p + "ln2.gain", 1, d);
    lb.ln2_b = layout->add(p + "ln2.bias", 1, d);
    lb.w1 = layout->add(p + "ffn.w1", d, cfg.ffn_size);
    lb.b1 = layout->add(p + "ffn.b1", 1, cfg.ffn_size);
    lb.w2 = layout->add(p + "ffn.w2", cfg.ffn_size, d);
    lb.b2 = layout->add(p + "ffn.b2", 1, d);
    b.layers.push_back(lb);
  }
  b.lnf_g = layout->add("lnf.gain", 1, d);
  b.lnf_b = layout->add("lnf.bias", 1, d);
  if (cfg.head == HeadKind::kTokens) {
    b.head_w = layout->add("head.w", d, cfg.vocab_size);
    b.head_b = layout->add("head.b", 1, cfg.vocab_size);
    b.enc_w = layout->add("encoder.weight", 1, d);
    b.enc_c = layout->add("encoder.bias", 1, d);
    b.enc_types = layout->add("encoder.types", cfg.n_attributes, d);
    if (cfg.mode == IntegrationMode::kLogits) {
      b.logit_proj = layout->add("encoder.logit_proj", d, cfg.vocab_size);
    }
  } else {
    b.head_w = layout->add("head.w", d, cfg.n_attributes);
    b.head_b = layout->add("head.b", 1, cfg.n_attributes);
  }
  return layout;
}

// --- model ----------------------------------------------------------------

template <typename S>
Transformer<S>::Transformer(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  params_ = ParamSet<S>(build_layout(cfg_, blocks_));
}

template <typename S>
void Transformer<S>::init(Rng& rng, double stddev) {
  const auto& layout = params_.layout();
  for (int i = 0; i < static_cast<int>(layout.blocks().size()); ++i) {
    const auto& spec = layout[i];
    auto blk = params_.block(i);
    const bool is_gain = spec.name.ends_with(".gain");
    const bool is_bias = spec.name.ends_with(".bias") || spec.name.ends_with(".bqkv") ||
                         spec.name.ends_with(".bo") || spec.name.ends_with(".b1") ||
                         spec.name.ends_with(".b2") || spec.name == "head.b";
    if (i == blocks_.logit_proj || i == blocks_.enc_c) {
      blk.setZero();
    } else if (is_gain) {
      blk.setOnes();
    } else if (is_bias) {
      blk.setZero();
    } else {
      for (Eigen::Index j = 0; j < blk.size(); ++j) {
        blk.data()[j] = static_cast<S>(rng.normal(0.0, stddev));
      }
    }
  }
}

template <typename S>
RowVec<S> Transformer<S>::encode(std::span<const double> values, const MaskDraw& mask) const {
  if (cfg_.head != HeadKind::kTokens) {
    throw Error(ErrorKind::kShapeMismatch, "regression model has no feature encoder");
  }
  return encode_attributes<S>(values, mask, params_.block(blocks_.enc_w),
                              params_.block(blocks_.enc_c), params_.block(blocks_.enc_types));
}

template <typename S>
RowMat<S> Transformer<S>::embed(std::span<const int> ids, const RowVec<S>* g) const {
  const auto T = static_cast<Eigen::Index>(ids.size());
  if (T == 0) throw Error(ErrorKind::kShapeMismatch, "empty input sequence");
  if (T > cfg_.max_len) throw Error(ErrorKind::kSequenceTooLong, "sequence exceeds max_len");
  if (g && g->size() != cfg_.d_model) throw Error(ErrorKind::kShapeMismatch, "feature width mismatch");
  RowMat<S> h(T, cfg_.d_model);
  for (Eigen::Index t = 0; t < T; ++t) {
    const int id = ids[static_cast<std::size_t>(t)];
    if (id < 0 || id >= cfg_.vocab_size) throw Error(ErrorKind::kShapeMismatch, "token id out of range");
    h.row(t) = params_.row(blocks_.tok_emb, id) + params_.row(blocks_.pos_emb, static_cast<int>(t));
  }
  if (g && cfg_.head == HeadKind::kTokens) {
    if (cfg_.mode == IntegrationMode::kSos) {
      h.row(0) += *g;
    } else if (cfg_.mode == IntegrationMode::kAll) {
      h.rowwise() += *g;
    }
  }
  return h;
}

template <typename S>
RowMat<S> Transformer<S>::forward(std::span<const int> ids, const RowVec<S>* g,
                                  ForwardCache<S>* cache, Rng* dropout_rng) const {
  const int d = cfg_.d_model;
  const int H = cfg_.n_heads;
  const int dh = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const bool causal = cfg_.head == HeadKind::kTokens;
  const bool drop = dropout_rng != nullptr && cfg_.dropout > 0.0;

  RowMat<S> h = embed(ids, g);
  const auto T = h.rows();
  if (cache) {
    cache->ids.assign(ids.begin(), ids.end());
    cache->layers.assign(static_cast<std::size_t>(cfg_.n_layers), {});
    cache->g = g ? *g : RowVec<S>();
  }

  LayerCache<S> scratch;
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const auto& lb = blocks_.layers[static_cast<std::size_t>(l)];
    LayerCache<S>& c = cache ? cache->layers[static_cast<std::size_t>(l)] : scratch;
    c.x_in = h;
    layer_norm<S>(h, params_.block(lb.ln1_g), params_.block(lb.ln1_b), c.xhat1, c.rstd1, c.a);
    c.qkv = c.a * params_.block(lb.wqkv);
    c.qkv.rowwise() += RowVec<S>(params_.block(lb.bqkv));
    c.attn.resize(T, d);
    c.probs.resize(static_cast<std::size_t>(H));
    for (int hd = 0; hd < H; ++hd) {
      auto q = c.qkv.middleCols(hd * dh, dh);
      auto k = c.qkv.middleCols(d + hd * dh, dh);
      auto v = c.qkv.middleCols(2 * d + hd * dh, dh);
      RowMat<S>& p = c.probs[static_cast<std::size_t>(hd)];
      p = (q * k.transpose()) * scale;
      if (causal) {
        for (Eigen::Index i = 0; i < T; ++i) {
          for (Eigen::Index j = i + 1; j < T; ++j) p(i, j) = -std::numeric_limits<S>::infinity();
        }
      }
      softmax_rows(p);
      c.attn.middleCols(hd * dh, dh).noalias() = p * v;
    }
    RowMat<S> proj = c.attn * params_.block(lb.wo);
    proj.rowwise() += RowVec<S>(params_.block(lb.bo));
    if (drop) {
      c.drop1 = dropout_mask<S>(T, d, cfg_.dropout, *dropout_rng);
      proj = proj.cwiseProduct(c.drop1);
    } else {
      c.drop1.resize(0, 0);
    }
    h += proj;
    c.h_mid = h;
    layer_norm<S>(h, params_.block(lb.ln2_g), params_.block(lb.ln2_b), c.xhat2, c.rstd2, c.m);
    c.u = c.m * params_.block(lb.w1);
    c.u.rowwise() += RowVec<S>(params_.block(lb.b1));
    c.v = c.u.unaryExpr([](S x) { return gelu(x); });
    RowMat<S> ff = c.v * params_.block(lb.w2);
    ff.rowwise() += RowVec<S>(params_.block(lb.b2));
    if (drop) {
      c.drop2 = dropout_mask<S>(T, d, cfg_.dropout, *dropout_rng);
      ff = ff.cwiseProduct(c.drop2);
    } else {
      c.drop2.resize(0, 0);
    }
    h += ff;
  }

  RowMat<S> xhatf, hf;
  std::vector<S> rstdf;
  layer_norm<S>(h, params_.block(blocks_.lnf_g), params_.block(blocks_.lnf_b), xhatf, rstdf, hf);

  RowMat<S> out;
  if (cfg_.head == HeadKind::kTokens) {
    if (g && cfg_.mode == IntegrationMode::kOutput) hf.rowwise() += *g;
    out = hf * params_.block(blocks_.head_w);
    out.rowwise() += RowVec<S>(params_.block(blocks_.head_b));
    if (g && cfg_.mode == IntegrationMode::kLogits) {
      const RowVec<S> shift = *g * params_.block(blocks_.logit_proj);
      out.rowwise() += shift;
    }
  } else {
    const RowVec<S> pooled = hf.colwise().mean();
    out = pooled * params_.block(blocks_.head_w) + RowVec<S>(params_.block(blocks_.head_b));
  }
  if (cache) {
    cache->xhatf = std::move(xhatf);
    cache->rstdf = std::move(rstdf);
    cache->hf = std::move(hf);
  }
  return out;
}

template <typename S>
void Transformer<S>::backward(const ForwardCache<S>& cache, const RowMat<S>& dout,
                              ParamSet<S>& grads, RowVec<S>* dg) const {
  const int d = cfg_.d_model;
  const int H = cfg_.n_heads;
  const int dh = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const auto T = static_cast<Eigen::Index>(cache.ids.size());
  const bool has_g = cache.g.size() == d;

  RowMat<S> dhf;
  if (cfg_.head == HeadKind::kTokens) {
    grads.block(blocks_.head_w).noalias() += cache.hf.transpose() * dout;
    grads.block(blocks_.head_b) += dout.colwise().sum();
    dhf = dout * params_.block(blocks_.head_w).transpose();
    if (has_g && cfg_.mode == IntegrationMode::kLogits) {
      const RowVec<S> dsum = dout.colwise().sum();
      grads.block(blocks_.logit_proj).noalias() += cache.g.transpose() * dsum;
      if (dg) *dg += dsum * params_.block(blocks_.logit_proj).transpose();
    }
    if (has_g && cfg_.mode == IntegrationMode::kOutput && dg) *dg += dhf.colwise().sum();
  } else {
    const RowVec<S> pooled = cache.hf.colwise().mean();
    grads.block(blocks_.head_w).noalias() += pooled.transpose() * dout;
    grads.block(blocks_.head_b) += dout;
    const RowVec<S> dpooled = dout * params_.block(blocks_.head_w).transpose();
    dhf = dpooled.replicate(T, 1) / static_cast<S>(T);
  }

  RowMat<S> dx = layer_norm_backward<S>(dhf, cache.xhatf, cache.rstdf, params_.block(blocks_.lnf_g),
                                        grads.block(blocks_.lnf_g), grads.block(blocks_.lnf_b));

  for (int l = cfg_.n_layers - 1; l >= 0; --l) {
    const auto& lb = blocks_.layers[static_cast<std::size_t>(l)];
    const LayerCache<S>& c = cache.layers[static_cast<std::size_t>(l)];

    // feed-forward branch
    RowMat<S> dff = dx;
    if (c.drop2.size() > 0) dff = dff.cwiseProduct(c.drop2);
    grads.block(lb.w2).noalias() += c.v.transpose() * dff;
    grads.block(lb.b2) += dff.colwise().sum();
    RowMat<S> du = dff * params_.block(lb.w2).transpose();
    du = du.cwiseProduct(c.u.unaryExpr([](S x) { return gelu_grad(x); }));
    grads.block(lb.w1).noalias() += c.m.transpose() * du;
    grads.block(lb.b1) += du.colwise().sum();
    const RowMat<S> dm = du * params_.block(lb.w1).transpose();
    dx += layer_norm_backward<S>(dm, c.xhat2, c.rstd2, params_.block(lb.ln2_g),
                                 grads.block(lb.ln2_g), grads.block(lb.ln2_b));

    // attention branch
    RowMat<S> dproj = dx;
    if (c.drop1.size() > 0) dproj = dproj.cwiseProduct(c.drop1);
    grads.block(lb.wo).noalias() += c.attn.transpose() * dproj;
    grads.block(lb.bo) += dproj.colwise().sum();
    const RowMat<S> dattn = dproj * params_.block(lb.wo).transpose();
    RowMat<S> dqkv(T, 3 * d);
    for (int hd = 0; hd < H; ++hd) {
      auto q = c.qkv.middleCols(hd * dh, dh);
      auto k = c.qkv.middleCols(d + hd * dh, dh);
      auto v = c.qkv.middleCols(2 * d + hd * dh, dh);
      const RowMat<S>& p = c.probs[static_cast<std::size_t>(hd)];
      const auto dO = dattn.middleCols(hd * dh, dh);
      dqkv.middleCols(2 * d + hd * dh, dh).noalias() = p.transpose() * dO;
      const RowMat<S> dp = dO * v.transpose();
      RowMat<S> ds(T, T);
      for (Eigen::Index i = 0; i < T; ++i) {
        const S dot = dp.row(i).dot(p.row(i));
        ds.row(i) = p.row(i).cwiseProduct((dp.row(i).array() - dot).matrix());
      }
      ds *= scale;
      dqkv.middleCols(hd * dh, dh).noalias() = ds * k;
      dqkv.middleCols(d + hd * dh, dh).noalias() = ds.transpose() * q;
    }
    grads.block(lb.wqkv).noalias() += c.a.transpose() * dqkv;
    grads.block(lb.bqkv) += dqkv.colwise().sum();
    const RowMat<S> da = dqkv * params_.block(lb.wqkv).transpose();
    dx += layer_norm_backward<S>(da, c.xhat1, c.rstd1, params_.block(lb.ln1_g),
                                 grads.block(lb.ln1_g), grads.block(lb.ln1_b));
  }

  for (Eigen::Index t = 0; t < T; ++t) {
    grads.row(blocks_.tok_emb, cache.ids[static_cast<std::size_t>(t)]) += dx.row(t);
    grads.row(blocks_.pos_emb, static_cast<int>(t)) += dx.row(t);
  }
  if (has_g && dg && cfg_.head == HeadKind::kTokens) {
    if (cfg_.mode == IntegrationMode::kSos) {
      *dg += dx.row(0);
    } else if (cfg_.mode == IntegrationMode::kAll) {
      *dg += dx.colwise().sum();
    }
  }
}

template <typename S>
DecodeState<S> Transformer<S>::start_decode(const RowVec<S>* g) const {
  if (cfg_.head != HeadKind::kTokens) {
    throw Error(ErrorKind::kShapeMismatch, "incremental decoding needs a token head");
  }
  DecodeState<S> st;
  st.keys.assign(static_cast<std::size_t>(cfg_.n_layers), RowMat<S>(cfg_.max_len, cfg_.d_model));
  st.values.assign(static_cast<std::size_t>(cfg_.n_layers), RowMat<S>(cfg_.max_len, cfg_.d_model));
  if (g) st.g = *g;
  return st;
}

template <typename S>
RowVec<S> Transformer<S>::decode_step(DecodeState<S>& st, int token) const {
  const int d = cfg_.d_model;
  const int H = cfg_.n_heads;
  const int dh = d / H;
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const int t = st.position;
  if (t >= cfg_.max_len) throw Error(ErrorKind::kSequenceTooLong, "decode past max_len");
  if (token < 0 || token >= cfg_.vocab_size) throw Error(ErrorKind::kShapeMismatch, "token id out of range");
  const bool has_g = st.g.size() == d;

  RowMat<S> h(1, d);
  h.row(0) = params_.row(blocks_.tok_emb, token) + params_.row(blocks_.pos_emb, t);
  if (has_g) {
    if (cfg_.mode == IntegrationMode::kAll || (cfg_.mode == IntegrationMode::kSos && t == 0)) {
      h.row(0) += st.g;
    }
  }
  RowMat<S> xhat, a;
  std::vector<S> rstd;
  for (int l = 0; l < cfg_.n_layers; ++l) {
    const auto& lb = blocks_.layers[static_cast<std::size_t>(l)];
    layer_norm<S>(h, params_.block(lb.ln1_g), params_.block(lb.ln1_b), xhat, rstd, a);
    RowVec<S> qkv = a * params_.block(lb.wqkv) + RowVec<S>(params_.block(lb.bqkv));
    auto& K = st.keys[static_cast<std::size_t>(l)];
    auto& V = st.values[static_cast<std::size_t>(l)];
    K.row(t) = qkv.segment(d, d);
    V.row(t) = qkv.segment(2 * d, d);
    RowVec<S> attn(d);
    for (int hd = 0; hd < H; ++hd) {
      const auto q = qkv.segment(hd * dh, dh);
      RowVec<S> s = (K.block(0, hd * dh, t + 1, dh) * q.transpose()).transpose() * scale;
      const S mx = s.maxCoeff();
      s = (s.array() - mx).exp();
      s /= s.sum();
      attn.segment(hd * dh, dh) = s * V.block(0, hd * dh, t + 1, dh);
    }
    h.row(0) += attn * params_.block(lb.wo) + RowVec<S>(params_.block(lb.bo));
    layer_norm<S>(h, params_.block(lb.ln2_g), params_.block(lb.ln2_b), xhat, rstd, a);
    RowVec<S> u = a * params_.block(lb.w1) + RowVec<S>(params_.block(lb.b1));
    u = u.unaryExpr([](S x) { return gelu(x); });
    h.row(0) += u * params_.block(lb.w2) + RowVec<S>(params_.block(lb.b2));
  }
  RowMat<S> hf;
  layer_norm<S>(h, params_.block(blocks_.lnf_g), params_.block(blocks_.lnf_b), xhat, rstd, hf);
  if (has_g && cfg_.mode == IntegrationMode::kOutput) hf.row(0) += st.g;
  RowVec<S> logits = hf.row(0) * params_.block(blocks_.head_w) + RowVec<S>(params_.block(blocks_.head_b));
  if (has_g && cfg_.mode == IntegrationMode::kLogits) {
    logits += st.g * params_.block(blocks_.logit_proj);
  }
  ++st.position;
  return logits;
}

template class Transformer<float>;
template class Transformer<double>;

}  // namespace linggen
