#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace diversenet {

// Dense real tensor, row-major. Zero extents are permitted so that empty
// feature blocks (e.g. concatenation with a width-0 tensor) stay expressible.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape);  // zero-filled
  Tensor(std::vector<std::size_t> shape, std::vector<double> values);

  static Tensor scalar(double v);
  static Tensor row(std::vector<double> v);  // shape [1 x n]
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const std::vector<std::size_t>& shape() const { return shape_; }
  std::size_t ndim() const { return shape_.size(); }
  std::size_t extent(std::size_t axis) const { return shape_[axis]; }
  std::size_t size() const { return values_.size(); }

  std::size_t rows() const;  // 2-d tensors only
  std::size_t cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  // Value of a single-element tensor.
  double item() const;

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
  bool all_finite() const;
  std::string shape_str() const;  // "[2x3]", for error messages

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> values_;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

}  // namespace diversenet
