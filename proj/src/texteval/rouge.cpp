// SPDX-License-Identifier: Apache-2.0
#include "s2t/texteval/rouge.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace s2t {
namespace {

RougeScore score(double hits, double hyp_total, double ref_total) {
  RougeScore s;
  s.precision = hits / std::max(hyp_total, 1.0);
  s.recall = hits / std::max(ref_total, 1.0);
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

std::map<Tokens, std::size_t> ngrams(const Tokens& t, std::size_t n) {
  std::map<Tokens, std::size_t> out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

using Table = std::vector<std::vector<std::size_t>>;

Table lcs_table(const Tokens& a, const Tokens& b) {
  Table t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
  return t;
}

// Indices into `ref` of one LCS, recovered with the same tie rule as the
// reference Python package so union-LCS counts agree.
std::vector<std::size_t> lcs_indices(const Tokens& ref, const Tokens& cand) {
  const Table t = lcs_table(ref, cand);
  std::vector<std::size_t> idx;
  std::size_t i = ref.size(), j = cand.size();
  while (i > 0 && j > 0) {
    if (ref[i - 1] == cand[j - 1]) {
      idx.push_back(i - 1);
      --i;
      --j;
    } else if (t[i][j - 1] > t[i - 1][j]) {
      --j;
    } else {
      --i;
    }
  }
  std::reverse(idx.begin(), idx.end());
  return idx;
}

std::vector<Tokens> lines(std::string_view text) {
  std::vector<Tokens> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    Tokens t = normalize_text(text.substr(pos, end - pos));
    if (!t.empty()) out.push_back(std::move(t));
    pos = end + 1;
  }
  return out;
}

}  // namespace

RougeScore rouge_n(const Tokens& ref, const Tokens& hyp, std::size_t n) {
  const auto r = ngrams(ref, n), h = ngrams(hyp, n);
  std::size_t hits = 0, ref_total = 0, hyp_total = 0;
  for (const auto& [g, c] : r) {
    ref_total += c;
    if (auto it = h.find(g); it != h.end()) hits += std::min(c, it->second);
  }
  for (const auto& [g, c] : h) hyp_total += c;
  return score(static_cast<double>(hits), static_cast<double>(hyp_total), static_cast<double>(ref_total));
}

RougeScore rouge_l(const Tokens& ref, const Tokens& hyp) {
  const double lcs = static_cast<double>(lcs_table(ref, hyp)[ref.size()][hyp.size()]);
  return score(lcs, static_cast<double>(hyp.size()), static_cast<double>(ref.size()));
}

RougeScore rouge_lsum(const std::vector<Tokens>& ref_sentences, const std::vector<Tokens>& hyp_sentences) {
  std::map<std::string, std::size_t> ref_left, hyp_left;
  std::size_t ref_total = 0, hyp_total = 0;
  for (const auto& s : ref_sentences)
    for (const auto& w : s) ++ref_left[w], ++ref_total;
  for (const auto& s : hyp_sentences)
    for (const auto& w : s) ++hyp_left[w], ++hyp_total;

  std::size_t hits = 0;
  for (const auto& r : ref_sentences) {
    std::set<std::size_t> uni;
    for (const auto& h : hyp_sentences)
      for (std::size_t i : lcs_indices(r, h)) uni.insert(i);
    for (std::size_t i : uni) {
      const std::string& w = r[i];
      if (ref_left[w] > 0 && hyp_left[w] > 0) {
        ++hits;
        --ref_left[w];
        --hyp_left[w];
      }
    }
  }
  return score(static_cast<double>(hits), static_cast<double>(hyp_total), static_cast<double>(ref_total));
}

RougeResult rouge_all(std::string_view ref, std::string_view hyp) {
  const auto ref_lines = lines(ref), hyp_lines = lines(hyp);
  Tokens r, h;
  for (const auto& l : ref_lines) r.insert(r.end(), l.begin(), l.end());
  for (const auto& l : hyp_lines) h.insert(h.end(), l.begin(), l.end());
  return {rouge_n(r, h, 1), rouge_n(r, h, 2), rouge_l(r, h), rouge_lsum(ref_lines, hyp_lines)};
}

}  // namespace s2t
