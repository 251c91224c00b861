// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/optimizer.hpp"

#include <cmath>

#include "s2t/error.hpp"

namespace s2t {

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam.lr: must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam: betas must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam.eps: must be > 0");
  if (!(clip_norm >= 0.0)) throw ConfigError("adam.clip_norm: must be >= 0");
}

Adam::Adam(AdamConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size()) throw NumericError("adam: parameter and gradient counts differ");
  if (m_.empty()) {
    for (Tensor* p : params) {
      m_.emplace_back(p->shape());
      v_.emplace_back(p->shape());
    }
  }
  if (m_.size() != params.size()) throw NumericError("adam: parameter list changed between steps");

  double scale = 1.0;
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (const Tensor& g : grads)
      for (double v : g.data()) sq += v * v;
    const double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) scale = cfg_.clip_norm / norm;
  }

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    const Tensor& g = grads[k];
    if (g.shape() != p.shape()) {
      throw NumericError("adam: gradient " + shape_str(g.shape()) + " for parameter " + shape_str(p.shape()));
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i] * scale;
      m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * gi;
      v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * gi * gi;
      p[i] -= cfg_.lr * (m_[k][i] / bc1) / (std::sqrt(v_[k][i] / bc2) + cfg_.eps);
    }
  }
}

}  // namespace s2t
