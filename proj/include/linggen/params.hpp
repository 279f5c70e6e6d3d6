#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "linggen/errors.hpp"

namespace linggen {

struct BlockSpec {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

// Ordered list of named parameter blocks packed into one flat buffer.
class Layout {
 public:
  // Returns the block index.
  int add(std::string name, int rows, int cols) {
    BlockSpec b{std::move(name), rows, cols, total_};
    total_ += b.size();
    blocks_.push_back(std::move(b));
    return static_cast<int>(blocks_.size()) - 1;
  }

  const std::vector<BlockSpec>& blocks() const { return blocks_; }
  const BlockSpec& operator[](int i) const { return blocks_[static_cast<std::size_t>(i)]; }
  std::size_t total() const { return total_; }

  int find(const std::string& name) const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      if (blocks_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

 private:
  std::vector<BlockSpec> blocks_;
  std::size_t total_ = 0;
};

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using RowVec = Eigen::Matrix<S, 1, Eigen::Dynamic>;

// Flat parameter (or gradient) storage over a Layout.
template <typename S>
class ParamSet {
 public:
  using Map = Eigen::Map<RowMat<S>>;
  using ConstMap = Eigen::Map<const RowMat<S>>;

  ParamSet() = default;
  explicit ParamSet(std::shared_ptr<const Layout> layout)
      : layout_(std::move(layout)), data_(layout_->total(), S(0)) {}

  Map block(int i) {
    const auto& b = (*layout_)[i];
    return Map(data_.data() + b.offset, b.rows, b.cols);
  }
  ConstMap block(int i) const {
    const auto& b = (*layout_)[i];
    return ConstMap(data_.data() + b.offset, b.rows, b.cols);
  }
  // Row r of block i as a 1 x cols map.
  Eigen::Map<RowVec<S>> row(int i, int r) {
    const auto& b = (*layout_)[i];
    return Eigen::Map<RowVec<S>>(data_.data() + b.offset + static_cast<std::size_t>(r) * b.cols, b.cols);
  }
  Eigen::Map<const RowVec<S>> row(int i, int r) const {
    const auto& b = (*layout_)[i];
    return Eigen::Map<const RowVec<S>>(data_.data() + b.offset + static_cast<std::size_t>(r) * b.cols,
                                       b.cols);
  }

  std::span<S> flat() { return data_; }
  std::span<const S> flat() const { return data_; }
  std::size_t size() const { return data_.size(); }
  const Layout& layout() const { return *layout_; }
  const std::shared_ptr<const Layout>& layout_ptr() const { return layout_; }

  void zero() { std::fill(data_.begin(), data_.end(), S(0)); }

 private:
  std::shared_ptr<const Layout> layout_;
  // Aligned so vectorized reductions peel identically on every allocation,
  // which keeps training bit-reproducible.
  std::vector<S, Eigen::aligned_allocator<S>> data_;
};

}  // namespace linggen
