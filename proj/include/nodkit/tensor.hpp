#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace nodkit {

// Dense row-major tensor. Rank is dynamic but everything in this project is
// rank 1..5: (z,y,x) voxel grids, (c,z,y,x) feature maps, (n,c,z,y,x)
// pooled stacks.
template <typename T>
class TensorT {
 public:
  TensorT() = default;

  explicit TensorT(std::vector<int64_t> shape) : shape_(std::move(shape)) {
    data_.assign(static_cast<size_t>(checked_numel(shape_)), T{});
  }

  static TensorT full(std::vector<int64_t> shape, T value) {
    TensorT t(std::move(shape));
    t.fill(value);
    return t;
  }

  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int64_t>& shape() const { return shape_; }
  int64_t dim(int i) const { return shape_.at(static_cast<size_t>(i)); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  T& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  const T& operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // (z,y,x) accessor for rank-3 tensors.
  T& at(int64_t z, int64_t y, int64_t x) {
    return data_[static_cast<size_t>((z * shape_[1] + y) * shape_[2] + x)];
  }
  const T& at(int64_t z, int64_t y, int64_t x) const {
    return data_[static_cast<size_t>((z * shape_[1] + y) * shape_[2] + x)];
  }

  // (c,z,y,x) accessor for rank-4 tensors.
  T& at(int64_t c, int64_t z, int64_t y, int64_t x) {
    return data_[static_cast<size_t>(
        ((c * shape_[1] + z) * shape_[2] + y) * shape_[3] + x)];
  }
  const T& at(int64_t c, int64_t z, int64_t y, int64_t x) const {
    return data_[static_cast<size_t>(
        ((c * shape_[1] + z) * shape_[2] + y) * shape_[3] + x)];
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(T{}); }

  bool same_shape(const TensorT& o) const { return shape_ == o.shape_; }

  bool operator==(const TensorT& o) const {
    return shape_ == o.shape_ && data_ == o.data_;
  }

 private:
  static int64_t checked_numel(const std::vector<int64_t>& shape) {
    int64_t n = 1;
    for (int64_t d : shape) {
      if (d <= 0) throw std::invalid_argument("tensor dims must be positive");
      if (d > (int64_t{1} << 32) || n > (int64_t{1} << 40) / d)
        throw std::length_error("tensor too large");
      n *= d;
    }
    return n;
  }

  std::vector<int64_t> shape_;
  std::vector<T> data_;
};

using Tensor = TensorT<float>;
using MaskGrid = TensorT<uint8_t>;

}  // namespace nodkit
