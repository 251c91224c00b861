// SPDX-License-Identifier: Apache-2.0
#include "s2t/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "s2t/error.hpp"

namespace s2t {
namespace {

double evaluate(const LossFn& loss_fn, const std::vector<Tensor>& values) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(values.size());
  for (const auto& v : values) leaves.push_back(tape.constant(v));
  const Var loss = loss_fn(tape, leaves);
  if (loss.size() != 1) throw NumericError("grad_check: loss must be scalar");
  const double l = loss.value()[0];
  if (!std::isfinite(l)) throw NumericError("grad_check: non-finite loss");
  return l;
}

}  // namespace

GradReport grad_check(const LossFn& loss_fn, std::span<const NamedTensor> params, double eps) {
  std::vector<Tensor> values;
  values.reserve(params.size());
  for (const auto& p : params) values.push_back(p.value);

  std::vector<Tensor> analytic;
  {
    Tape tape;
    std::vector<Var> leaves;
    for (const auto& v : values) leaves.push_back(tape.leaf(v));
    const Var loss = loss_fn(tape, leaves);
    if (loss.size() != 1) throw NumericError("grad_check: loss must be scalar");
    if (!std::isfinite(loss.value()[0])) throw NumericError("grad_check: non-finite loss");
    tape.backward(loss);
    for (const Var& l : leaves) analytic.push_back(l.grad());
  }

  GradReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    double worst = 0.0;
    for (std::size_t i = 0; i < values[k].size(); ++i) {
      const double orig = values[k][i];
      auto at = [&](double h) {
        values[k][i] = orig + h;
        return evaluate(loss_fn, values);
      };
      // Fourth-order central stencil.
      const double numeric = (8.0 * (at(eps) - at(-eps)) - (at(2.0 * eps) - at(-2.0 * eps))) / (12.0 * eps);
      values[k][i] = orig;
      const double a = analytic[k][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    report.per_param[params[k].name] = std::max(report.per_param[params[k].name], worst);
    report.max_rel_error = std::max(report.max_rel_error, worst);
  }
  return report;
}

}  // namespace s2t
