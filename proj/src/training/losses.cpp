// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/losses.hpp"

#include <vector>

#include "s2t/error.hpp"
#include "s2t/numerics/ops.hpp"

namespace s2t {

Var mse_loss(std::span<const Var> pred, const Tensor& target) {
  if (target.rank() != 2 || pred.size() != target.rows()) {
    throw NumericError("mse_loss: " + std::to_string(pred.size()) + " predictions for target " +
                       shape_str(target.shape()));
  }
  Var stacked = stack_rows(pred);
  return mse(stacked, stacked.tape().constant(target));
}

Var eos_bce_loss(Var probs, std::size_t eos_index, double pos_weight) {
  const std::size_t T = probs.size();
  if (eos_index < 1 || eos_index > T) {
    throw NumericError("eos_bce_loss: eos index " + std::to_string(eos_index) + " outside [1, " + std::to_string(T) +
                       "]");
  }
  std::vector<double> labels(T, 0.0);
  labels[eos_index - 1] = 1.0;
  return weighted_bce(probs, labels, pos_weight, kBceClamp);
}

}  // namespace s2t
