// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "s2t/numerics/tape.hpp"
#include "s2t/numerics/tensor_dir.hpp"

// Small recurrent text decoder that reads a sequence of textual embeddings
// through attention. It stands in for a pretrained summarization decoder.
//
//   c_t = sum_i a_ti y_i,  a_t = softmax_i(y_i^T W_a h_{t-1})
//   h_t = tanh(W_h h_{t-1} + E[tok_{t-1}] + W_c c_t + b)
//   logits_t = W_o [h_t | c_t] + b_o
namespace s2t {

/// Token 0 is the end-of-summary symbol.
struct Vocab {
  std::vector<std::string> words;
  std::map<std::string, std::size_t> index;

  static Vocab from_summaries(std::span<const std::string> summaries);
  static Vocab from_words(std::vector<std::string> words);
  std::size_t size() const noexcept { return words.size(); }
  /// Normalized tokens mapped to ids plus the closing end symbol. Unknown words throw DataError.
  std::vector<std::size_t> encode(const std::string& text) const;
  std::string decode(std::span<const std::size_t> ids) const;
};

inline constexpr const char* kEndWord = "</s>";

template <class T>
struct TextDecoderWeights {
  T emb;     ///< [(V+1) x h], row V is the start symbol
  T w_h;     ///< [h x h]
  T w_c;     ///< [h x d_txt]
  T b;       ///< [h]
  T w_attn;  ///< [h x d_txt]
  T w_out;   ///< [V x (h + d_txt)]
  T b_out;   ///< [V]

  template <class F>
  void visit(F&& f) {
    f("textdec.emb", emb);
    f("textdec.w_h", w_h);
    f("textdec.w_c", w_c);
    f("textdec.b", b);
    f("textdec.w_attn", w_attn);
    f("textdec.w_out", w_out);
    f("textdec.b_out", b_out);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<TextDecoderWeights*>(this)->visit([&](const char* n, T& v) { f(n, static_cast<const T&>(v)); });
  }
};

using TextDecoderParams = TextDecoderWeights<Tensor>;
using TextDecoderVars = TextDecoderWeights<Var>;

struct TextDecoder {
  Vocab vocab;
  TextDecoderParams params;
  std::size_t hidden() const { return params.w_h.dim(0); }
  std::size_t width() const { return params.w_c.dim(1); }
};

/// Random recurrent weights, zero output layer (uniform predictions).
TextDecoder init_text_decoder(Vocab vocab, std::size_t d_txt, std::size_t hidden, std::uint64_t seed);

TextDecoderVars bind(Tape& tape, const TextDecoderParams& params, bool trainable = true);

/// Per-step logits under teacher forcing on `tokens` (step t is fed
/// tokens[t-1], step 0 the start symbol). ys must be non-empty.
std::vector<Var> text_decoder_logits(const TextDecoderVars& p, std::span<const Var> ys,
                                     std::span<const std::size_t> tokens);

/// Mean per-token cross-entropy.
Var text_decoder_loss(const TextDecoderVars& p, std::span<const Var> ys, std::span<const std::size_t> tokens);

/// Greedy decoding until the end symbol or max_len tokens (end symbol excluded).
std::vector<std::size_t> greedy_decode(const TextDecoder& dec, const Tensor& ys, std::size_t max_len);

void to_dir(const TextDecoder& dec, TensorDir& dir);
/// Returns false when the directory holds no text decoder.
bool from_dir(const TensorDir& dir, TextDecoder& dec);

}  // namespace s2t
