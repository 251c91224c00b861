// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>
#include <vector>

#include "s2t/texteval/text.hpp"

namespace s2t {

struct RougeScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct RougeResult {
  RougeScore r1, r2, rl, rlsum;
};

/// Clipped n-gram overlap.
RougeScore rouge_n(const Tokens& ref, const Tokens& hyp, std::size_t n);

/// Longest common subsequence over the whole token streams.
RougeScore rouge_l(const Tokens& ref, const Tokens& hyp);

/// Summary-level LCS: for each reference sentence, the union of its LCS
/// matches against every hypothesis sentence, with hits clipped by token counts.
RougeScore rouge_lsum(const std::vector<Tokens>& ref_sentences, const std::vector<Tokens>& hyp_sentences);

/// All four variants on raw text. Lines separate sentences for ROUGE-Lsum;
/// every line is passed through normalize_text.
RougeResult rouge_all(std::string_view ref, std::string_view hyp);

}  // namespace s2t
