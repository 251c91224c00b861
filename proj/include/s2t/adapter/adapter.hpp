// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s2t/adapter/params.hpp"

// Cross-modal adapter: conv downsampler, BiLSTM encoder, LSTM decoder with
// intra-temporal cross attention, intra-decoder attention, textual output
// projection and the windowed EOS head.
//
// Steps are 0-based in code; "first step" means t = 1 in the usual notation.
namespace s2t {

struct EncoderStates {
  Var keys;  ///< [L~ x 2d_h], row i = [fwd_i | bwd_i]
  std::size_t length = 0;
  Var init_h;  ///< decoder initial hidden state, from the bridge
  Var init_c;
};

struct DecoderState {
  Var h;  ///< hidden state h^d
  Var c;  ///< cell state s^d
  std::vector<Var> history;  ///< past hidden states, oldest first
  /// Per encoder position, sum over past steps of exp(raw cross score).
  /// Invalid before the first step (empty sum).
  Var score_sums;
  std::size_t step = 0;
};

struct AttentionResult {
  Var context;
  Var weights;
  Var score_sums;  ///< updated accumulator (cross attention only)
};

struct StepOutput {
  Var y;  ///< textual embedding for this step
  Var h;
  Var c;
  AttentionResult cross;
  AttentionResult intra;
};

/// Length after the downsampler: ceil(ceil(L/2)/2) for the default stride.
std::size_t downsampled_length(std::size_t length, const AdapterConfig& cfg);

/// One LSTM step; returns {h, c}. Gates are [input, forget, cell, output].
std::pair<Var, Var> lstm_cell(Var w, Var b, Var x, Var h, Var c);

/// x is [L x d_in]. Throws NumericError for L = 0.
Var downsample(const AdapterVars& p, Var x, const AdapterConfig& cfg);

EncoderStates encode(const AdapterVars& p, Var x_ds);

DecoderState initial_state(const EncoderStates& enc);

/// Intra-temporal cross attention with query `query` (the current decoder
/// hidden state). Raw scores are divided by exp-sums of the same position's
/// past scores before normalising over positions; on the first step the
/// divisor is 1.
AttentionResult cross_attention(const AdapterVars& p, const DecoderState& state, Var query, const EncoderStates& enc);

/// Attention of `query` over state.history; zero context when history is empty.
AttentionResult intra_decoder_attention(const AdapterVars& p, const DecoderState& state, Var query);

/// Windowed self attention over embeddings ys around position t, the window
/// clipped to the sequence bounds.
Var eos_attention(const AdapterVars& p, std::span<const Var> ys, std::size_t t, std::size_t window);

/// Runs one decoder step and advances `state`.
StepOutput decoder_step(const AdapterVars& p, Var input, DecoderState& state, const EncoderStates& enc);

/// sigma(W_eos [h | c | c_eos] + b), shape [1].
Var eos_probability(const AdapterVars& p, Var h, Var c, Var c_eos);

struct DecodeResult {
  std::vector<Var> inputs;  ///< what each step was fed
  std::vector<Var> ys, hs, cs;
  std::vector<AttentionResult> cross;
};

/// Runs `steps` decoder steps. The first step is fed the learned start
/// vector. Step t >= 1 is fed teacher row t-1 while t < teacher_steps and the
/// model's own previous output afterwards (gradients flow through it). `teacher` may
/// be null when teacher_steps <= 1.
DecodeResult decode(const AdapterVars& p, const EncoderStates& enc, std::size_t steps, const Tensor* teacher,
                    std::size_t teacher_steps);

/// EOS probabilities for positions [0, count) of ys (ys may be longer, which
/// widens the windows near the end).
std::vector<Var> eos_probabilities(const AdapterVars& p, const DecodeResult& dec, std::size_t count,
                                   std::size_t window);

}  // namespace s2t
