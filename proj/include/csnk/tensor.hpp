#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "csnk/errors.hpp"
#include "csnk/multicomplex.hpp"

namespace csnk {

/// Dense row-major n-dimensional array. The shape is fixed at construction.
template <class S>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape)
      : shape_(std::move(shape)), data_(element_count(shape_), S(0.0)) {}

  Tensor(std::vector<std::size_t> shape, std::vector<S> data) : shape_(std::move(shape)), data_(std::move(data)) {
    if (element_count(shape_) != data_.size())
      throw ShapeError("tensor data length " + std::to_string(data_.size()) + " does not match shape product " +
                       std::to_string(element_count(shape_)));
  }

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<S> data() { return data_; }
  std::span<const S> data() const { return data_; }
  const std::vector<S>& values() const { return data_; }

  S& operator[](std::size_t i) { return data_[i]; }
  const S& operator[](std::size_t i) const { return data_[i]; }

  /// Element (r, c) of a rank-2 tensor.
  S& operator()(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  const S& operator()(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// Row r of a rank-2 tensor.
  std::span<const S> row(std::size_t r) const { return std::span<const S>(data_).subspan(r * shape_[1], shape_[1]); }
  std::span<S> row(std::size_t r) { return std::span<S>(data_).subspan(r * shape_[1], shape_[1]); }

 private:
  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  std::vector<std::size_t> shape_;
  std::vector<S> data_;
};

}  // namespace csnk
