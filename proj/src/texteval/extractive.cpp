// SPDX-License-Identifier: Apache-2.0
#include "s2t/texteval/extractive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "s2t/error.hpp"
#include "s2t/texteval/text.hpp"

namespace s2t {

void ExtractiveConfig::validate() const {
  if (w_bar < 1) throw ConfigError("extractive.w_bar: must be >= 1");
}

std::size_t word_count(const std::string& sentence) {
  std::istringstream in(sentence);
  std::size_t n = 0;
  for (std::string w; in >> w;) ++n;
  return n;
}

std::vector<std::vector<double>> term_frequency_embeddings(const std::vector<std::string>& sentences) {
  std::vector<Tokens> toks;
  std::map<std::string, std::size_t> vocab;
  for (const auto& s : sentences) {
    toks.push_back(normalize_text(s));
    for (const auto& w : toks.back()) vocab.emplace(w, 0);
  }
  std::size_t next = 0;
  for (auto& [w, id] : vocab) id = next++;
  std::vector<std::vector<double>> out;
  for (const auto& t : toks) {
    std::vector<double> v(vocab.size(), 0.0);
    for (const auto& w : t) v[vocab.at(w)] += 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::size_t> extractive_select(const std::vector<std::string>& sentences,
                                           const std::vector<std::vector<double>>& embeddings,
                                           const ExtractiveConfig& cfg) {
  cfg.validate();
  if (sentences.empty()) throw DataError("extractive: no sentences");
  if (sentences.size() != embeddings.size()) {
    throw DataError("extractive: " + std::to_string(sentences.size()) + " sentences but " +
                    std::to_string(embeddings.size()) + " embeddings");
  }
  const std::size_t n = sentences.size(), d = embeddings.front().size();
  std::vector<double> centroid(d, 0.0);
  for (const auto& e : embeddings) {
    if (e.size() != d) throw DataError("extractive: embeddings differ in length");
    for (std::size_t k = 0; k < d; ++k) centroid[k] += e[k] / static_cast<double>(n);
  }
  const double cnorm = std::sqrt(std::inner_product(centroid.begin(), centroid.end(), centroid.begin(), 0.0));

  // Cosine distance; infinite for a zero-norm sentence (or centroid).
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& e = embeddings[i];
    const double enorm = std::sqrt(std::inner_product(e.begin(), e.end(), e.begin(), 0.0));
    dist[i] = enorm > 0.0 && cnorm > 0.0
                  ? 1.0 - std::inner_product(e.begin(), e.end(), centroid.begin(), 0.0) / (enorm * cnorm)
                  : INFINITY;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

  std::vector<std::size_t> picked{order[0]};
  std::size_t words = word_count(sentences[order[0]]);
  for (std::size_t r = 1; r < n; ++r) {
    const std::size_t w = word_count(sentences[order[r]]);
    if (words + w > cfg.w_bar) break;
    words += w;
    picked.push_back(order[r]);
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

std::string extractive_summary(const std::vector<std::string>& sentences,
                               const std::vector<std::vector<double>>& embeddings, const ExtractiveConfig& cfg) {
  std::string out;
  for (std::size_t i : extractive_select(sentences, embeddings, cfg)) {
    if (!out.empty()) out += ' ';
    out += sentences[i];
  }
  return out;
}

}  // namespace s2t
