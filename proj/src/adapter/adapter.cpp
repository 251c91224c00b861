// SPDX-License-Identifier: Apache-2.0
#include "s2t/adapter/adapter.hpp"

#include <algorithm>

#include "s2t/error.hpp"
#include "s2t/numerics/ops.hpp"

namespace s2t {
namespace {

Var finite(Var v, const char* stage) {
  if (!v.value().all_finite()) throw NumericError(std::string("non-finite values in ") + stage);
  return v;
}

std::size_t conv_out(std::size_t length, const AdapterConfig& cfg) {
  const std::size_t pad = cfg.conv_kernel / 2;
  return (length + 2 * pad - cfg.conv_kernel) / cfg.conv_stride + 1;
}

}  // namespace

std::size_t downsampled_length(std::size_t length, const AdapterConfig& cfg) {
  if (length == 0) throw NumericError("downsample: empty feature sequence");
  return conv_out(conv_out(length, cfg), cfg);
}

std::pair<Var, Var> lstm_cell(Var w, Var b, Var x, Var h, Var c) {
  const std::size_t H = h.size();
  Var z = add(linear(w, concat({x, h})), b);
  Var i = sigmoid(slice(z, 0, H));
  Var f = sigmoid(slice(z, H, H));
  Var g = tanh(slice(z, 2 * H, H));
  Var o = sigmoid(slice(z, 3 * H, H));
  Var c_next = add(mul(f, c), mul(i, g));
  Var h_next = mul(o, tanh(c_next));
  return {h_next, c_next};
}

Var downsample(const AdapterVars& p, Var x, const AdapterConfig& cfg) {
  if (x.value().rank() != 2 || x.value().dim(0) == 0) {
    throw NumericError("downsample: expected non-empty [L x d_in] features, got " + shape_str(x.shape()));
  }
  finite(x, "downsampler input");
  const std::size_t pad = cfg.conv_kernel / 2;
  Var h = tanh(conv1d(x, p.conv1_w, p.conv1_b, cfg.conv_kernel, cfg.conv_stride, pad));
  return finite(tanh(conv1d(h, p.conv2_w, p.conv2_b, cfg.conv_kernel, cfg.conv_stride, pad)), "downsampler");
}

EncoderStates encode(const AdapterVars& p, Var x_ds) {
  if (x_ds.value().rank() != 2 || x_ds.value().dim(0) == 0) {
    throw NumericError("encode: expected non-empty [L x d] input, got " + shape_str(x_ds.shape()));
  }
  finite(x_ds, "encoder input");
  Tape& tape = x_ds.tape();
  const std::size_t L = x_ds.value().dim(0);
  const std::size_t H = p.attn_dec.value().dim(0);

  std::vector<Var> rows(L);
  for (std::size_t i = 0; i < L; ++i) rows[i] = row(x_ds, i);

  const Var zero = tape.constant(Tensor({H}));
  std::vector<Var> fwd(L), bwd(L);
  Var hf = zero, cf = zero;
  for (std::size_t i = 0; i < L; ++i) {
    std::tie(hf, cf) = lstm_cell(p.enc_fwd_w, p.enc_fwd_b, rows[i], hf, cf);
    fwd[i] = hf;
  }
  Var hb = zero, cb = zero;
  for (std::size_t i = L; i-- > 0;) {
    std::tie(hb, cb) = lstm_cell(p.enc_bwd_w, p.enc_bwd_b, rows[i], hb, cb);
    bwd[i] = hb;
  }
  std::vector<Var> keys(L);
  for (std::size_t i = 0; i < L; ++i) keys[i] = concat({fwd[i], bwd[i]});

  EncoderStates enc;
  enc.keys = finite(stack_rows(keys), "encoder");
  enc.length = L;
  Var init = add(linear(p.bridge_w, concat({hf, hb, cf, cb})), p.bridge_b);
  enc.init_h = slice(init, 0, H);
  enc.init_c = slice(init, H, H);
  return enc;
}

DecoderState initial_state(const EncoderStates& enc) {
  DecoderState s;
  s.h = enc.init_h;
  s.c = enc.init_c;
  return s;
}

AttentionResult cross_attention(const AdapterVars& p, const DecoderState& state, Var query,
                                const EncoderStates& enc) {
  if (state.score_sums.valid() && state.score_sums.size() != enc.length) {
    throw NumericError("cross_attention: accumulator has " + std::to_string(state.score_sums.size()) +
                       " entries for " + std::to_string(enc.length) + " encoder positions");
  }
  // e_i = h^T W h_i = (W^T h) . h_i
  Var scores = linear(enc.keys, linear_t(p.attn_enc, query));
  Var exp_scores = exp(scores);
  AttentionResult r;
  if (state.score_sums.valid()) {
    // exp(e)/S normalised over i equals softmax(e - log S).
    r.weights = softmax(sub(scores, log(state.score_sums)));
    r.score_sums = add(state.score_sums, exp_scores);
  } else {
    r.weights = softmax(scores);
    r.score_sums = exp_scores;
  }
  r.context = linear_t(enc.keys, r.weights);
  return r;
}

AttentionResult intra_decoder_attention(const AdapterVars& p, const DecoderState& state, Var query) {
  AttentionResult r;
  Tape& tape = query.tape();
  if (state.history.empty()) {
    r.context = tape.constant(Tensor({query.size()}));
    r.weights = tape.constant(Tensor({0}));
    return r;
  }
  Var keys = stack_rows(state.history);
  r.weights = softmax(linear(keys, linear_t(p.attn_dec, query)));
  r.context = linear_t(keys, r.weights);
  return r;
}

Var eos_attention(const AdapterVars& p, std::span<const Var> ys, std::size_t t, std::size_t window) {
  if (ys.empty()) throw NumericError("eos_attention: empty embedding sequence");
  if (t >= ys.size()) throw NumericError("eos_attention: position out of range");
  const std::size_t lo = t >= window ? t - window : 0;
  const std::size_t hi = std::min(ys.size() - 1, t + window);
  Var keys = stack_rows(ys.subspan(lo, hi - lo + 1));
  // e_t' = y_t'^T W y_t
  Var weights = softmax(linear(keys, linear(p.attn_eos, ys[t])));
  return linear_t(keys, weights);
}

StepOutput decoder_step(const AdapterVars& p, Var input, DecoderState& state, const EncoderStates& enc) {
  finite(input, "decoder input");
  StepOutput out;
  std::tie(out.h, out.c) = lstm_cell(p.dec_w, p.dec_b, input, state.h, state.c);
  finite(out.c, "decoder LSTM");
  out.cross = cross_attention(p, state, out.h, enc);
  finite(out.cross.context, "cross attention");
  out.intra = intra_decoder_attention(p, state, out.h);
  finite(out.intra.context, "intra-decoder attention");
  out.y = finite(linear(p.text_proj, concat({out.h, out.c, out.cross.context, out.intra.context})),
                 "output projection");

  state.h = out.h;
  state.c = out.c;
  state.score_sums = out.cross.score_sums;
  state.history.push_back(out.h);
  ++state.step;
  return out;
}

Var eos_probability(const AdapterVars& p, Var h, Var c, Var c_eos) {
  return sigmoid(add(linear(p.eos_w, concat({h, c, c_eos})), p.eos_b));
}

DecodeResult decode(const AdapterVars& p, const EncoderStates& enc, std::size_t steps, const Tensor* teacher,
                    std::size_t teacher_steps) {
  if (teacher_steps > 1 && (!teacher || teacher->rows() + 1 < std::min(teacher_steps, steps))) {
    throw NumericError("decode: teacher sequence too short");
  }
  Tape& tape = enc.keys.tape();
  DecoderState state = initial_state(enc);
  DecodeResult r;
  for (std::size_t t = 0; t < steps; ++t) {
    Var input;
    if (t == 0) {
      input = p.dec_start;
    } else if (t < teacher_steps) {
      input = tape.constant(teacher->row_tensor(t - 1));
    } else {
      input = r.ys.back();
    }
    StepOutput o = decoder_step(p, input, state, enc);
    r.inputs.push_back(input);
    r.ys.push_back(o.y);
    r.hs.push_back(o.h);
    r.cs.push_back(o.c);
    r.cross.push_back(o.cross);
  }
  return r;
}

std::vector<Var> eos_probabilities(const AdapterVars& p, const DecodeResult& dec, std::size_t count,
                                   std::size_t window) {
  if (count > dec.ys.size()) throw NumericError("eos_probabilities: count exceeds decoded length");
  std::vector<Var> probs;
  probs.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    Var c_eos = eos_attention(p, dec.ys, t, window);
    probs.push_back(eos_probability(p, dec.hs[t], dec.cs[t], c_eos));
  }
  return probs;
}

}  // namespace s2t
