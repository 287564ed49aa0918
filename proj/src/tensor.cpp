#include "diversenet/tensor.hpp"

#include <cmath>
#include <utility>

#include "diversenet/errors.hpp"

namespace diversenet {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) n *= e;
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), values_(shape_product(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  if (shape_product(shape_) != values_.size()) {
    throw DimensionError("tensor shape " + shape_str() + " does not match " +
                         std::to_string(values_.size()) + " values");
  }
}

Tensor Tensor::scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::row(std::vector<double> v) {
  std::size_t n = v.size();
  return Tensor({1, n}, std::move(v));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (shape_.size() != 2) throw DimensionError("rows() needs a 2-d tensor, got " + shape_str());
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (shape_.size() != 2) throw DimensionError("cols() needs a 2-d tensor, got " + shape_str());
  return shape_[1];
}

double Tensor::item() const {
  if (values_.size() != 1) {
    throw DimensionError("item() needs a single-element tensor, got " + shape_str());
  }
  return values_[0];
}

bool Tensor::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape_[i]);
  }
  s += "]";
  return s;
}

}  // namespace diversenet
