// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "s2t/numerics/random.hpp"
#include "s2t/numerics/tensor.hpp"

namespace s2t {

struct MaskConfig {
  double p_mask = 6.5e-2;  ///< probability that a span starts at a position
  std::size_t m_len = 10;  ///< span length
  void validate() const;
};

/// One uniform draw per position (so the stream does not depend on earlier
/// outcomes); a hit marks positions i..i+m_len-1, clipped at the end.
std::vector<std::uint8_t> sample_mask(std::size_t length, const MaskConfig& cfg, rnd::Engine& rng);

struct MaskedFeatures {
  Tensor x;
  std::vector<std::uint8_t> mask;
};

/// Replaces masked rows of x with `embedding`; deterministic in `seed`.
MaskedFeatures mask_features(const Tensor& x, const MaskConfig& cfg, std::uint64_t seed, const Tensor& embedding);

/// lambda(j) = max(epsilon, k - c j).
struct ScheduleParams {
  double epsilon = 1.0;
  double k = 1.0;
  double c = 0.0;
  void validate() const;

  static ScheduleParams teacher_forcing() { return {1.0, 1.0, 0.0}; }
  static ScheduleParams stage2() { return {5.0e-1, 1.0, 8.0e-6}; }
  static ScheduleParams stage3() { return {0.0, 1.0, 3.0e-4}; }
};

double teacher_forcing_ratio(std::uint64_t step, const ScheduleParams& s);

/// Number of leading decoder steps fed from the teacher: ceil(lambda * T),
/// clamped to [0, T]. The rest of the sequence is fed the model's own
/// previous prediction.
std::size_t teacher_steps(double lambda, std::size_t length);

}  // namespace s2t
