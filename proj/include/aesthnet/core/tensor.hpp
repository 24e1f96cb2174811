#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "aesthnet/core/error.hpp"

namespace aesthnet {

/// Dense row-major n-dimensional array. This is deliberately minimal: the
/// layers do their math through Eigen maps over the flat buffer.
template <typename Scalar>
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(count(shape_)) {}

  Tensor(std::vector<std::size_t> shape, Scalar value)
      : shape_(std::move(shape)), data_(count(shape_), value) {}

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t i) const { return shape_.at(i); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  Scalar& operator[](std::size_t i) { return data_[i]; }
  const Scalar& operator[](std::size_t i) const { return data_[i]; }

  /// Multi-index access, bounds responsibility on the caller.
  Scalar& at(std::initializer_list<std::size_t> idx) {
    return data_[offset(idx)];
  }
  const Scalar& at(std::initializer_list<std::size_t> idx) const {
    return data_[offset(idx)];
  }

  void fill(Scalar v) { std::fill(data_.begin(), data_.end(), v); }

  void reshape(std::vector<std::size_t> shape) {
    if (count(shape) != data_.size())
      throw ValidationError("reshape changes element count");
    shape_ = std::move(shape);
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  static std::string shape_string(const std::vector<std::size_t>& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) out += "x";
      out += std::to_string(s[i]);
    }
    return out + "]";
  }

private:
  static std::size_t count(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t d : s) n *= d;
    return s.empty() ? 0 : n;
  }

  std::size_t offset(std::initializer_list<std::size_t> idx) const {
    std::size_t off = 0;
    std::size_t k = 0;
    for (std::size_t i : idx) {
      off = off * shape_[k] + i;
      ++k;
    }
    return off;
  }

  std::vector<std::size_t> shape_;
  std::vector<Scalar> data_;
};

}  // namespace aesthnet
