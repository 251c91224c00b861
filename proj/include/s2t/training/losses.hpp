// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "s2t/numerics/tape.hpp"

namespace s2t {

inline constexpr double kBceClamp = 1e-12;

/// Mean over positions and dims of (pred - target)^2. Throws NumericError
/// when lengths or widths differ.
Var mse_loss(std::span<const Var> pred, const Tensor& target);

/// Weighted BCE averaged over T with label 1 at eos_index (1-based) and 0
/// elsewhere. Throws NumericError unless 1 <= eos_index <= T.
Var eos_bce_loss(Var probs, std::size_t eos_index, double pos_weight);

/// Default positive-class weight for a sequence of length T: T / 4.
inline double default_pos_weight(std::size_t length) { return static_cast<double>(length) / 4.0; }

}  // namespace s2t
