// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "s2t/adapter/params.hpp"
#include "s2t/training/norm.hpp"

namespace s2t {

struct GenerationResult {
  Tensor normalized;  ///< [t_max x d_txt], model space
  Tensor full;        ///< [t_max x d_txt], de-normalized
  std::vector<double> eos_probs;  ///< [t_max]
  std::size_t cut = 0;            ///< t_pi, 1-based
  Tensor reduced;                 ///< first `cut` rows of `full`
  bool truncation_miss = false;   ///< no probability exceeded pi; cut = t_max
};

/// Free-running generation of cfg.t_max embeddings from normalized features,
/// then EOS probabilities in a second pass over the finished sequence, then
/// truncation at the first t with p_t > cfg.pi. Throws DataError when
/// `embedding_norm` is null.
GenerationResult generate(const Tensor& features, const AdapterParams& params, const AdapterConfig& cfg,
                          const NormStats* embedding_norm);

/// First 1-based t with probs[t-1] > pi, or probs.size() when none.
std::size_t eos_cut(const std::vector<double>& probs, double pi, bool* miss = nullptr);

}  // namespace s2t
