// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "s2t/numerics/tensor.hpp"

namespace s2t {

/// Per-dimension mean and standard deviation over every row of a dataset.
struct NormStats {
  Tensor mean;  ///< [d]
  Tensor std;   ///< [d], each entry >= 1e-8
  std::vector<std::size_t> floored;  ///< dimensions whose std was raised to the floor
};

inline constexpr double kStdFloor = 1e-8;

/// Two-pass population statistics over all rows of all matrices. Throws
/// DataError on an empty dataset or mismatched widths; warns when a
/// dimension is constant.
NormStats compute_norm_stats(std::span<const Tensor> sequences);

/// (x - mean) / std row-wise.
Tensor apply_norm(const Tensor& x, const NormStats& stats);
/// x * std + mean row-wise.
Tensor invert_norm(const Tensor& x, const NormStats& stats);

}  // namespace s2t
