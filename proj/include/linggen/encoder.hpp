#pragma once

#include <span>
#include <string_view>

#include "linggen/params.hpp"
#include "linggen/pmask.hpp"

namespace linggen {

// Where the global attribute feature enters the decoder.
enum class IntegrationMode { kSos, kAll, kOutput, kLogits };

std::string_view mode_key(IntegrationMode m);
IntegrationMode parse_mode(std::string_view key);

// Feature encoder parameters: one shared R^1 -> R^d linear map (weight,
// bias) plus a type embedding row per attribute.
template <typename S>
struct EncoderParams {
  RowVec<S> weight;
  RowVec<S> bias;
  RowMat<S> types;  // k x d
};

// E_i = values[i] * weight + bias + types.row(i) for every unmasked i; the
// global feature is the mean of those rows, or zero when all are masked.
// Masked values are never read.
template <typename S>
RowVec<S> encode_attributes(std::span<const double> values, const MaskDraw& mask,
                            const Eigen::Ref<const RowVec<S>>& weight,
                            const Eigen::Ref<const RowVec<S>>& bias,
                            const Eigen::Ref<const RowMat<S>>& types) {
  const auto k = static_cast<int>(types.rows());
  if (static_cast<int>(values.size()) != k) {
    throw Error(ErrorKind::kShapeMismatch, "attribute vector length differs from type rows");
  }
  if (weight.size() != types.cols() || bias.size() != types.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "encoder width mismatch");
  }
  RowVec<S> g = RowVec<S>::Zero(types.cols());
  int active = 0;
  for (int i = 0; i < k; ++i) {
    if (mask.is_masked(i)) continue;
    g += static_cast<S>(values[static_cast<std::size_t>(i)]) * weight + bias + types.row(i);
    ++active;
  }
  if (active > 0) g /= static_cast<S>(active);
  return g;
}

template <typename S>
RowVec<S> encode_attributes(std::span<const double> values, const MaskDraw& mask,
                            const EncoderParams<S>& p) {
  return encode_attributes<S>(values, mask, p.weight, p.bias, p.types);
}

// Accumulates d(loss)/d(weight, bias, types) given d(loss)/dg. When
// dvalues is non-empty it receives d(loss)/d(values); masked entries get 0.
template <typename S, typename WMap, typename TMap>
void encode_attributes_backward(std::span<const double> values, const MaskDraw& mask,
                                const Eigen::Ref<const RowVec<S>>& weight, const RowVec<S>& dg,
                                WMap&& dweight, WMap&& dbias, TMap&& dtypes,
                                std::span<double> dvalues = {}) {
  const auto k = static_cast<int>(values.size());
  int active = 0;
  for (int i = 0; i < k; ++i) {
    if (!mask.is_masked(i)) ++active;
  }
  for (int i = 0; i < k; ++i) {
    if (!dvalues.empty()) dvalues[static_cast<std::size_t>(i)] = 0.0;
  }
  if (active == 0) return;
  const RowVec<S> de = dg / static_cast<S>(active);
  for (int i = 0; i < k; ++i) {
    if (mask.is_masked(i)) continue;
    dweight += static_cast<S>(values[static_cast<std::size_t>(i)]) * de;
    dbias += de;
    dtypes.row(i) += de;
    if (!dvalues.empty()) {
      dvalues[static_cast<std::size_t>(i)] = static_cast<double>(weight.dot(de));
    }
  }
}

}  // namespace linggen
