#pragma once

#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "linggen/encoder.hpp"
#include "linggen/params.hpp"
#include "linggen/rng.hpp"

namespace linggen {

enum class HeadKind {
  kTokens,      // causal decoder, per-position vocabulary logits
  kRegression,  // bidirectional encoder, mean pool, linear head to k outputs
};

struct ModelConfig {
  int d_model = 128;
  int n_layers = 4;
  int n_heads = 4;
  int ffn_size = 512;
  int max_len = 100;
  int vocab_size = 0;
  int n_attributes = 0;
  IntegrationMode mode = IntegrationMode::kSos;
  double dropout = 0.0;
  HeadKind head = HeadKind::kTokens;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

// Block indices of one transformer layer inside the Layout.
struct LayerBlocks {
  int ln1_g, ln1_b, wqkv, bqkv, wo, bo, ln2_g, ln2_b, w1, b1, w2, b2;
};

struct ModelBlocks {
  int tok_emb = -1, pos_emb = -1;
  std::vector<LayerBlocks> layers;
  int lnf_g = -1, lnf_b = -1;
  int head_w = -1, head_b = -1;
  // Feature encoder (token head only).
  int enc_w = -1, enc_c = -1, enc_types = -1;
  // LOGITS mode projection R^d -> R^|V|.
  int logit_proj = -1;
};

std::shared_ptr<Layout> build_layout(const ModelConfig& cfg, ModelBlocks& blocks);

template <typename S>
struct LayerCache {
  RowMat<S> x_in, xhat1, a, qkv, attn, h_mid, xhat2, m, u, v;
  RowMat<S> drop1, drop2;  // empty when dropout inactive
  std::vector<S> rstd1, rstd2;
  std::vector<RowMat<S>> probs;  // per head, T x T
};

template <typename S>
struct ForwardCache {
  std::vector<int> ids;
  std::vector<LayerCache<S>> layers;
  RowMat<S> xhatf;
  std::vector<S> rstdf;
  RowMat<S> hf;  // final hidden after norm (and OUTPUT-mode feature)
  RowVec<S> g;
};

// Per-layer key/value memory for incremental decoding.
template <typename S>
struct DecodeState {
  std::vector<RowMat<S>> keys;
  std::vector<RowMat<S>> values;
  RowVec<S> g;
  int position = 0;
};

// Transformer stack with explicit forward/backward passes. S is float for
// training and double for gradient checking.
template <typename S>
class Transformer {
 public:
  Transformer() = default;
  explicit Transformer(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  const ModelBlocks& blocks() const { return blocks_; }
  ParamSet<S>& params() { return params_; }
  const ParamSet<S>& params() const { return params_; }
  ParamSet<S> make_grads() const { return ParamSet<S>(params_.layout_ptr()); }

  // Normal(0, std) weights, unit norm gains, zero biases, zero logit projection.
  void init(Rng& rng, double stddev = 0.02);

  // Global feature from normalized attribute values and a mask.
  RowVec<S> encode(std::span<const double> values, const MaskDraw& mask) const;

  // Token head: returns T x |V| logits for ids (ids[0] is SOS). g may be
  // null for the unconditioned pass. Regression head: returns 1 x k.
  // When cache is non-null activations are stored for backward. A non-null
  // dropout_rng enables dropout.
  RowMat<S> forward(std::span<const int> ids, const RowVec<S>* g, ForwardCache<S>* cache = nullptr,
                    Rng* dropout_rng = nullptr) const;

  // Accumulates parameter gradients; adds d(loss)/dg into *dg when given.
  void backward(const ForwardCache<S>& cache, const RowMat<S>& dout, ParamSet<S>& grads,
                RowVec<S>* dg = nullptr) const;

  // Incremental decoding (token head only). Feeds one token at the next
  // position and returns its logits row.
  DecodeState<S> start_decode(const RowVec<S>* g) const;
  RowVec<S> decode_step(DecodeState<S>& state, int token) const;

  // Per-position input embeddings before the first layer (for tests).
  RowMat<S> embed(std::span<const int> ids, const RowVec<S>* g) const;

 private:
  ModelConfig cfg_;
  ModelBlocks blocks_;
  ParamSet<S> params_;
};

extern template class Transformer<float>;
extern template class Transformer<double>;

}  // namespace linggen
