// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "s2t/numerics/tensor.hpp"

namespace s2t {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  ///< global gradient-norm clip; 0 disables
  void validate() const;
};

/// Adam with bias correction. Moment buffers are keyed by position, so the
/// caller must pass parameters in the same order on every step.
class Adam {
 public:
  explicit Adam(AdamConfig cfg);
  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::size_t t_ = 0;
  std::vector<Tensor> m_, v_;
};

}  // namespace s2t
