// SPDX-License-Identifier: Apache-2.0
#include "s2t/numerics/tensor.hpp"

#include <cmath>
#include <numeric>

#include "s2t/error.hpp"

namespace s2t {

std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

std::size_t shape_numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::size_t b) { return a * b; });
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_numel(shape_) != data_.size()) {
    throw NumericError("tensor shape " + shape_str(shape_) + " does not match " +
                       std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  Shape shape{values.size()};
  return Tensor(std::move(shape), std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

Tensor Tensor::row_tensor(std::size_t r) const {
  auto span = row(r);
  return Tensor::vector({span.begin(), span.end()});
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.size() != size()) {
    throw NumericError("cannot accumulate " + shape_str(other.shape()) + " into " + shape_str(shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Tensor stack(std::span<const Tensor> rows) {
  if (rows.empty()) throw NumericError("stack: no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * d);
  for (const auto& r : rows) {
    if (r.size() != d) throw NumericError("stack: ragged rows");
    data.insert(data.end(), r.data().begin(), r.data().end());
  }
  return Tensor({rows.size(), d}, std::move(data));
}

}  // namespace s2t
