// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "s2t/numerics/tape.hpp"

namespace s2t {

struct NamedTensor {
  std::string name;
  Tensor value;
};

struct GradReport {
  double max_rel_error = 0.0;
  std::map<std::string, double> per_param;
};

/// Builds the scalar loss on `tape` from leaves bound to the given parameters
/// (same order). Must be deterministic.
using LossFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

/// Compares reverse-mode gradients with five-point central differences for every element
/// of every parameter. Relative error uses max(|a|, |b|, 1e-8) as denominator.
GradReport grad_check(const LossFn& loss_fn, std::span<const NamedTensor> params, double eps = 1e-6);

}  // namespace s2t
