// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace s2t {

struct ExtractiveConfig {
  std::size_t w_bar = 24;  ///< word budget
  void validate() const;
};

/// Term-frequency vectors over the sorted normalized vocabulary of `sentences`.
std::vector<std::vector<double>> term_frequency_embeddings(const std::vector<std::string>& sentences);

/// Indices of the sentences selected by the centroid rule, in document order.
/// Sentences are ranked by cosine distance to the mean embedding (ties by
/// index, zero-norm embeddings last) and accepted in rank order until the
/// next one would push the word count past w_bar. The top-ranked sentence is
/// always accepted.
std::vector<std::size_t> extractive_select(const std::vector<std::string>& sentences,
                                           const std::vector<std::vector<double>>& embeddings,
                                           const ExtractiveConfig& cfg);

/// Selected sentences joined by a space, in document order.
std::string extractive_summary(const std::vector<std::string>& sentences,
                               const std::vector<std::vector<double>>& embeddings, const ExtractiveConfig& cfg);

/// Whitespace-delimited word count.
std::size_t word_count(const std::string& sentence);

}  // namespace s2t
