// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace s2t {

using Tokens = std::vector<std::string>;

/// Lowercase, decompose, drop combining marks, map every non-alphanumeric
/// code point to a space, split on whitespace. Invalid UTF-8 bytes are
/// treated as separators.
Tokens normalize_text(std::string_view text);

std::string join(const Tokens& tokens, std::string_view sep = " ");

/// Word-level Levenshtein distance with unit costs.
std::size_t edit_distance(const Tokens& ref, const Tokens& hyp);

/// (S + D + I) / |ref|. Throws DataError on an empty reference.
double wer(const Tokens& ref, const Tokens& hyp);

/// Splits on newlines and on '.', '!' or '?' followed by whitespace. Empty
/// pieces are dropped; each sentence keeps its terminator.
std::vector<std::string> split_sentences(std::string_view text);

/// Mean and half-width of a 95% normal-approximation interval
/// (1.96 * sample std / sqrt(n); zero for n < 2).
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
MeanCi mean_ci(const std::vector<double>& values);

/// Version string of the Unicode library backing normalize_text.
std::string unicode_library_version();

}  // namespace s2t
