// SPDX-License-Identifier: Apache-2.0
#include "s2t/inference/generate.hpp"

#include "s2t/adapter/adapter.hpp"
#include "s2t/error.hpp"
#include "s2t/numerics/ops.hpp"

namespace s2t {

std::size_t eos_cut(const std::vector<double>& probs, double pi, bool* miss) {
  if (probs.empty()) throw NumericError("eos_cut: no probabilities");
  for (std::size_t t = 0; t < probs.size(); ++t) {
    if (probs[t] > pi) {
      if (miss) *miss = false;
      return t + 1;
    }
  }
  if (miss) *miss = true;
  return probs.size();
}

GenerationResult generate(const Tensor& features, const AdapterParams& params, const AdapterConfig& cfg,
                          const NormStats* embedding_norm) {
  cfg.validate();
  if (!embedding_norm) throw DataError("generate: normalization statistics for embeddings are missing");
  check_shapes(params, cfg);

  Tape tape;
  const AdapterVars p = s2t::bind(tape, params, {});
  const EncoderStates enc = encode(p, downsample(p, tape.constant(features), cfg));
  const DecodeResult dec = decode(p, enc, cfg.t_max, nullptr, 0);
  const auto probs = eos_probabilities(p, dec, cfg.t_max, cfg.eos_window);

  GenerationResult r;
  std::vector<Tensor> rows;
  for (const Var& y : dec.ys) rows.push_back(y.value());
  r.normalized = stack(rows);
  r.full = invert_norm(r.normalized, *embedding_norm);
  for (const Var& pr : probs) r.eos_probs.push_back(pr.value()[0]);
  r.cut = eos_cut(r.eos_probs, cfg.pi, &r.truncation_miss);
  r.reduced = Tensor({r.cut, r.full.cols()},
                     {r.full.data().begin(), r.full.data().begin() + static_cast<std::ptrdiff_t>(r.cut * r.full.cols())});
  return r;
}

}  // namespace s2t
