// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "s2t/numerics/tape.hpp"

// Differentiable primitives. Every op validates shapes and throws
// NumericError with both shapes on mismatch.
namespace s2t {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// Sum of any number of equally shaped values.
Var add_n(std::span<const Var> parts);

/// y = W x for W [m x n], x [n].
Var linear(Var w, Var x);
/// y = W^T x for W [m x n], x [m]. Also the attention read-out: rows of W weighted by x.
Var linear_t(Var w, Var x);

Var tanh(Var a);
Var sigmoid(Var a);
Var exp(Var a);
Var log(Var a);

/// Softmax of a rank-1 tensor with max subtraction. Rejects NaN input.
Var softmax(Var scores);

/// Rank-1 concatenation. Zero-length parts are allowed; an empty list is not.
Var concat(std::span<const Var> parts);
Var concat(std::initializer_list<Var> parts);
Var slice(Var a, std::size_t offset, std::size_t length);
/// Stacks rank-1 values of equal length into a [n x d] matrix.
Var stack_rows(std::span<const Var> rows);
Var row(Var matrix, std::size_t r);

Var sum(Var a);
Var dot(Var a, Var b);
/// Mean over all elements of (a - b)^2.
Var mse(Var a, Var b);

/// Zero-padded 1-D convolution over time. x is [L x C_in], w is [C_out x k*C_in]
/// laid out tap-major (w[o][j*C_in + c] multiplies x[t*stride + j - pad][c]).
Var conv1d(Var x, Var w, Var b, std::size_t kernel, std::size_t stride, std::size_t pad);

/// Rows of x where mask[i] != 0 are replaced by the vector `replacement`.
Var replace_rows(Var x, std::span<const std::uint8_t> mask, Var replacement);

/// Mean over i of -(pos_weight*y_i*log p_i + (1-y_i)*log(1-p_i)), with p clamped
/// to [clamp, 1-clamp].
Var weighted_bce(Var probs, std::span<const double> labels, double pos_weight, double clamp = 1e-12);

/// -log softmax(logits)[target].
Var cross_entropy(Var logits, std::size_t target);

/// Copies the value onto the tape as a constant (gradient stops here).
Var detach(Var a);

// Plain (non-differentiable) helpers shared by modules and oracles.
namespace plain {
double sigmoid(double x);
std::vector<double> softmax(std::span<const double> scores);
}  // namespace plain

}  // namespace s2t
