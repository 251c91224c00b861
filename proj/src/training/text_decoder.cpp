// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/text_decoder.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "s2t/error.hpp"
#include "s2t/numerics/ops.hpp"
#include "s2t/numerics/random.hpp"
#include "s2t/texteval/text.hpp"

namespace s2t {

Vocab Vocab::from_words(std::vector<std::string> words) {
  Vocab v;
  v.words = std::move(words);
  if (v.words.empty() || v.words[0] != kEndWord) v.words.insert(v.words.begin(), kEndWord);
  for (std::size_t i = 0; i < v.words.size(); ++i) {
    if (!v.index.emplace(v.words[i], i).second) throw DataError("vocab: duplicate word '" + v.words[i] + "'");
  }
  return v;
}

Vocab Vocab::from_summaries(std::span<const std::string> summaries) {
  std::set<std::string> words;
  for (const auto& s : summaries)
    for (auto& w : normalize_text(s)) words.insert(std::move(w));
  return from_words({words.begin(), words.end()});
}

std::vector<std::size_t> Vocab::encode(const std::string& text) const {
  std::vector<std::size_t> ids;
  for (const auto& w : normalize_text(text)) {
    auto it = index.find(w);
    if (it == index.end()) throw DataError("vocab: unknown word '" + w + "'");
    ids.push_back(it->second);
  }
  ids.push_back(0);
  return ids;
}

std::string Vocab::decode(std::span<const std::size_t> ids) const {
  std::string out;
  for (std::size_t id : ids) {
    if (id == 0) break;
    if (!out.empty()) out += ' ';
    out += words.at(id);
  }
  return out;
}

TextDecoder init_text_decoder(Vocab vocab, std::size_t d_txt, std::size_t hidden, std::uint64_t seed) {
  if (vocab.size() < 2) throw ConfigError("text decoder: vocabulary needs at least 2 symbols");
  if (d_txt < 1 || hidden < 1) throw ConfigError("text decoder: dimensions must be >= 1");
  const std::size_t V = vocab.size(), h = hidden;
  TextDecoder dec{std::move(vocab), {}};
  auto& p = dec.params;
  p.emb = Tensor({V + 1, h});
  p.w_h = Tensor({h, h});
  p.w_c = Tensor({h, d_txt});
  p.b = Tensor({h});
  p.w_attn = Tensor({h, d_txt});
  p.w_out = Tensor({V, h + d_txt});
  p.b_out = Tensor({V});
  rnd::Engine rng(seed);
  auto fill = [&](Tensor& t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data()) v = rnd::uniform(rng, -bound, bound);
  };
  fill(p.emb, 1);
  fill(p.w_h, h);
  fill(p.w_c, d_txt);
  fill(p.w_attn, d_txt);
  return dec;
}

TextDecoderVars bind(Tape& tape, const TextDecoderParams& params, bool trainable) {
  std::vector<Var> vars;
  params.visit([&](const char*, const Tensor& t) { vars.push_back(tape.leaf(t, trainable)); });
  TextDecoderVars v;
  std::size_t i = 0;
  v.visit([&](const char*, Var& slot) { slot = vars[i++]; });
  return v;
}

std::vector<Var> text_decoder_logits(const TextDecoderVars& p, std::span<const Var> ys,
                                     std::span<const std::size_t> tokens) {
  if (ys.empty()) throw NumericError("text decoder: empty embedding sequence");
  const std::size_t V = p.w_out.value().dim(0), H = p.w_h.value().dim(0);
  Tape& tape = ys.front().tape();
  Var keys = stack_rows(ys);
  Var h = tape.constant(Tensor({H}));
  std::vector<Var> logits;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t] >= V) throw DataError("text decoder: token id " + std::to_string(tokens[t]) + " out of range");
    const std::size_t prev = t == 0 ? V : tokens[t - 1];
    Var attn = softmax(linear(keys, linear_t(p.w_attn, h)));
    Var ctx = linear_t(keys, attn);
    h = tanh(add_n(std::vector<Var>{linear(p.w_h, h), row(p.emb, prev), linear(p.w_c, ctx), p.b}));
    logits.push_back(add(linear(p.w_out, concat({h, ctx})), p.b_out));
  }
  return logits;
}

Var text_decoder_loss(const TextDecoderVars& p, std::span<const Var> ys, std::span<const std::size_t> tokens) {
  if (tokens.empty()) throw DataError("text decoder: empty token sequence");
  const auto logits = text_decoder_logits(p, ys, tokens);
  std::vector<Var> ce;
  for (std::size_t t = 0; t < tokens.size(); ++t) ce.push_back(cross_entropy(logits[t], tokens[t]));
  return scale(add_n(ce), 1.0 / static_cast<double>(ce.size()));
}

std::vector<std::size_t> greedy_decode(const TextDecoder& dec, const Tensor& ys, std::size_t max_len) {
  Tape tape;
  const TextDecoderVars p = bind(tape, dec.params, false);
  std::vector<Var> rows;
  for (std::size_t r = 0; r < ys.rows(); ++r) rows.push_back(tape.constant(ys.row_tensor(r)));
  // Re-running the teacher-forced graph on the growing prefix keeps a single
  // code path; summaries are short.
  std::vector<std::size_t> out;
  while (out.size() < max_len) {
    std::vector<std::size_t> prefix = out;
    prefix.push_back(0);
    const Tensor& last = text_decoder_logits(p, rows, prefix).back().value();
    const auto best = static_cast<std::size_t>(
        std::distance(last.data().begin(), std::max_element(last.data().begin(), last.data().end())));
    if (best == 0) break;
    out.push_back(best);
  }
  return out;
}

void to_dir(const TextDecoder& dec, TensorDir& dir) {
  dec.params.visit([&](const char* name, const Tensor& t) { dir.tensors.push_back({name, t}); });
  std::string words;
  for (std::size_t i = 1; i < dec.vocab.size(); ++i) words += (i > 1 ? " " : "") + dec.vocab.words[i];
  dir.meta["textdec.vocab"] = words;
}

bool from_dir(const TensorDir& dir, TextDecoder& dec) {
  if (!dir.find("textdec.emb")) return false;
  dec.params.visit([&](const char* name, Tensor& t) { t = dir.get(name); });
  auto it = dir.meta.find("textdec.vocab");
  if (it == dir.meta.end()) throw DataError("text decoder weights present without a vocabulary");
  std::vector<std::string> words;
  std::istringstream in(it->second);
  for (std::string w; in >> w;) words.push_back(w);
  dec.vocab = Vocab::from_words(std::move(words));
  const auto& p = dec.params;
  const std::size_t V = dec.vocab.size(), h = p.w_h.dim(0), d = p.w_c.dim(1);
  if (p.emb.shape() != Shape{V + 1, h} || p.w_out.shape() != Shape{V, h + d} || p.b_out.shape() != Shape{V} ||
      p.w_attn.shape() != Shape{h, d} || p.b.shape() != Shape{h}) {
    throw DataError("text decoder tensors do not match the stored vocabulary and dimensions");
  }
  return true;
}

}  // namespace s2t
