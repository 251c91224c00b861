// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "s2t/numerics/tape.hpp"
#include "s2t/numerics/tensor_dir.hpp"

namespace s2t {

struct AdapterConfig {
  std::size_t d_in = 768;
  std::size_t d_h = 768;
  std::size_t d_txt = 768;
  std::size_t conv_kernel = 5;
  std::size_t conv_stride = 2;
  std::size_t eos_window = 1;
  std::size_t t_max = 512;
  double pi = 0.5;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// All trainable adapter weights, parameterised on storage so the same layout
/// serves for plain tensors and for tape variables.
template <class T>
struct AdapterWeights {
  // Two stride-2 conv layers over time, tanh after each.
  T conv1_w, conv1_b, conv2_w, conv2_b;
  // BiLSTM encoder; gate rows ordered input, forget, cell, output.
  T enc_fwd_w, enc_fwd_b, enc_bwd_w, enc_bwd_b;
  // [h_fwd | h_bwd | c_fwd | c_bwd] -> [h0 | c0] for the decoder.
  T bridge_w, bridge_b;
  T dec_w, dec_b, dec_start;
  T attn_enc;   // d_h x 2d_h
  T attn_dec;   // d_h x d_h
  T attn_eos;   // d_txt x d_txt
  T text_proj;  // d_txt x 5d_h
  T eos_w, eos_b;
  T mask_embedding;

  template <class F>
  void visit(F&& f) {
    f("conv1.weight", conv1_w);
    f("conv1.bias", conv1_b);
    f("conv2.weight", conv2_w);
    f("conv2.bias", conv2_b);
    f("encoder.fwd.weight", enc_fwd_w);
    f("encoder.fwd.bias", enc_fwd_b);
    f("encoder.bwd.weight", enc_bwd_w);
    f("encoder.bwd.bias", enc_bwd_b);
    f("bridge.weight", bridge_w);
    f("bridge.bias", bridge_b);
    f("decoder.weight", dec_w);
    f("decoder.bias", dec_b);
    f("decoder.start", dec_start);
    f("W_attn_e", attn_enc);
    f("W_attn_d", attn_dec);
    f("W_attn_eos", attn_eos);
    f("W_text", text_proj);
    f("W_eos", eos_w);
    f("W_eos.bias", eos_b);
    f("mask_embedding", mask_embedding);
  }
  template <class F>
  void visit(F&& f) const {
    const_cast<AdapterWeights*>(this)->visit([&](const char* name, T& v) { f(name, static_cast<const T&>(v)); });
  }
};

using AdapterParams = AdapterWeights<Tensor>;
using AdapterVars = AdapterWeights<Var>;

/// Parameters updated by the EOS-only pre-training stage.
const std::set<std::string>& eos_parameter_names();

AdapterParams zero_params(const AdapterConfig& cfg);
/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, forget-gate bias 1, zero EOS head.
AdapterParams init_params(const AdapterConfig& cfg, std::uint64_t seed);

/// Throws DataError if any tensor disagrees with the configured dims.
void check_shapes(const AdapterParams& params, const AdapterConfig& cfg);
/// Recovers d_in, d_h, d_txt (and conv kernel) from tensor shapes.
AdapterConfig dims_from(const AdapterParams& params, AdapterConfig base = {});

/// Puts every tensor on the tape; names in `frozen` become constants.
AdapterVars bind(Tape& tape, const AdapterParams& params, const std::set<std::string>& frozen = {});

void to_dir(const AdapterParams& params, TensorDir& dir);
AdapterParams from_dir(const TensorDir& dir);

}  // namespace s2t
