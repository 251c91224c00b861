// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/schedule.hpp"

#include <algorithm>
#include <cmath>

#include "s2t/error.hpp"

namespace s2t {

void MaskConfig::validate() const {
  if (!(p_mask >= 0.0 && p_mask <= 1.0)) throw ConfigError("mask.p_mask: must lie in [0, 1]");
  if (m_len < 1) throw ConfigError("mask.m_len: must be >= 1");
}

std::vector<std::uint8_t> sample_mask(std::size_t length, const MaskConfig& cfg, rnd::Engine& rng) {
  cfg.validate();
  std::vector<std::uint8_t> mask(length, 0);
  for (std::size_t i = 0; i < length; ++i) {
    if (rnd::uniform01(rng) < cfg.p_mask) std::fill(mask.begin() + i, mask.begin() + std::min(length, i + cfg.m_len), 1);
  }
  return mask;
}

MaskedFeatures mask_features(const Tensor& x, const MaskConfig& cfg, std::uint64_t seed, const Tensor& embedding) {
  if (x.rank() != 2 || embedding.size() != x.cols()) {
    throw NumericError("mask_features: embedding " + shape_str(embedding.shape()) + " does not fit features " +
                       shape_str(x.shape()));
  }
  rnd::Engine rng(seed);
  MaskedFeatures out{x, sample_mask(x.rows(), cfg, rng)};
  for (std::size_t r = 0; r < x.rows(); ++r)
    if (out.mask[r])
      for (std::size_t c = 0; c < x.cols(); ++c) out.x.at(r, c) = embedding[c];
  return out;
}

void ScheduleParams::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= k && k <= 1.0)) throw ConfigError("schedule: need 0 <= epsilon <= k <= 1");
  if (!(c >= 0.0)) throw ConfigError("schedule.c: must be >= 0");
}

double teacher_forcing_ratio(std::uint64_t step, const ScheduleParams& s) {
  return std::max(s.epsilon, s.k - s.c * static_cast<double>(step));
}

std::size_t teacher_steps(double lambda, std::size_t length) {
  const double raw = std::ceil(lambda * static_cast<double>(length) - 1e-9);
  return static_cast<std::size_t>(std::clamp(raw, 0.0, static_cast<double>(length)));
}

}  // namespace s2t
