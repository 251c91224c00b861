// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/norm.hpp"

#include <cmath>

#include "s2t/error.hpp"
#include "s2t/log.hpp"

namespace s2t {
namespace {

void check_width(const Tensor& x, const NormStats& s) {
  if (x.rank() != 2 || x.cols() != s.mean.size()) {
    throw DataError("normalization: expected [n x " + std::to_string(s.mean.size()) + "], got " + shape_str(x.shape()));
  }
}

}  // namespace

NormStats compute_norm_stats(std::span<const Tensor> sequences) {
  std::size_t n = 0, d = 0;
  for (const Tensor& x : sequences) {
    if (x.rank() != 2) throw DataError("normalization: sequences must be matrices, got " + shape_str(x.shape()));
    if (n == 0 && x.rows() > 0) d = x.cols();
    if (x.rows() > 0 && x.cols() != d) throw DataError("normalization: sequence widths differ");
    n += x.rows();
  }
  if (n == 0) throw DataError("normalization: empty dataset");

  NormStats s{Tensor({d}), Tensor({d}), {}};
  for (const Tensor& x : sequences)
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += x.at(r, c);
  for (std::size_t c = 0; c < d; ++c) s.mean[c] /= static_cast<double>(n);
  for (const Tensor& x : sequences)
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double dev = x.at(r, c) - s.mean[c];
        s.std[c] += dev * dev;
      }
  for (std::size_t c = 0; c < d; ++c) {
    s.std[c] = std::sqrt(s.std[c] / static_cast<double>(n));
    if (!(s.std[c] >= kStdFloor)) {
      s.std[c] = kStdFloor;
      s.floored.push_back(c);
    }
  }
  if (!s.floored.empty()) {
    logging::warn("normalization: " + std::to_string(s.floored.size()) + " constant dimension(s), std floored at 1e-8");
  }
  return s;
}

Tensor apply_norm(const Tensor& x, const NormStats& s) {
  check_width(x, s);
  Tensor y = x;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y.at(r, c) = (y.at(r, c) - s.mean[c]) / s.std[c];
  return y;
}

Tensor invert_norm(const Tensor& x, const NormStats& s) {
  check_width(x, s);
  Tensor y = x;
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) y.at(r, c) = y.at(r, c) * s.std[c] + s.mean[c];
  return y;
}

}  // namespace s2t
