// SPDX-License-Identifier: Apache-2.0
#include "s2t/adapter/params.hpp"

#include <cmath>

#include "s2t/error.hpp"
#include "s2t/numerics/random.hpp"

namespace s2t {
namespace {

struct Shapes {
  std::map<std::string, Shape> by_name;
};

Shapes expected_shapes(const AdapterConfig& c) {
  const std::size_t k = c.conv_kernel, din = c.d_in, h = c.d_h, txt = c.d_txt;
  Shapes s;
  s.by_name = {
      {"conv1.weight", {din, k * din}},
      {"conv1.bias", {din}},
      {"conv2.weight", {din, k * din}},
      {"conv2.bias", {din}},
      {"encoder.fwd.weight", {4 * h, din + h}},
      {"encoder.fwd.bias", {4 * h}},
      {"encoder.bwd.weight", {4 * h, din + h}},
      {"encoder.bwd.bias", {4 * h}},
      {"bridge.weight", {2 * h, 4 * h}},
      {"bridge.bias", {2 * h}},
      {"decoder.weight", {4 * h, txt + h}},
      {"decoder.bias", {4 * h}},
      {"decoder.start", {txt}},
      {"W_attn_e", {h, 2 * h}},
      {"W_attn_d", {h, h}},
      {"W_attn_eos", {txt, txt}},
      {"W_text", {txt, 5 * h}},
      {"W_eos", {1, 2 * h + txt}},
      {"W_eos.bias", {1}},
      {"mask_embedding", {din}},
  };
  return s;
}

}  // namespace

void AdapterConfig::validate() const {
  auto need = [](bool ok, const char* field, const std::string& why) {
    if (!ok) throw ConfigError(std::string("adapter.") + field + ": " + why);
  };
  need(d_in >= 1, "d_in", "must be >= 1");
  need(d_h >= 1, "d_h", "must be >= 1");
  need(d_txt >= 1, "d_txt", "must be >= 1");
  need(conv_kernel >= 1 && conv_kernel % 2 == 1, "conv_kernel", "must be odd and >= 1");
  need(conv_stride >= 1, "conv_stride", "must be >= 1");
  need(t_max >= 1, "t_max", "must be >= 1");
  need(pi >= 0.0 && pi <= 1.0, "pi", "must lie in [0, 1]");
}

const std::set<std::string>& eos_parameter_names() {
  static const std::set<std::string> names{"W_attn_eos", "W_eos", "W_eos.bias"};
  return names;
}

AdapterParams zero_params(const AdapterConfig& cfg) {
  cfg.validate();
  const auto shapes = expected_shapes(cfg);
  AdapterParams p;
  p.visit([&](const char* name, Tensor& t) { t = Tensor(shapes.by_name.at(name)); });
  return p;
}

AdapterParams init_params(const AdapterConfig& cfg, std::uint64_t seed) {
  AdapterParams p = zero_params(cfg);
  rnd::Engine rng(seed);
  auto fill = [&](Tensor& t, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& v : t.data()) v = rnd::uniform(rng, -bound, bound);
  };
  const std::size_t h = cfg.d_h;
  fill(p.conv1_w, p.conv1_w.dim(1));
  fill(p.conv1_b, p.conv1_w.dim(1));
  fill(p.conv2_w, p.conv2_w.dim(1));
  fill(p.conv2_b, p.conv2_w.dim(1));
  for (Tensor* w : {&p.enc_fwd_w, &p.enc_fwd_b, &p.enc_bwd_w, &p.enc_bwd_b, &p.dec_w, &p.dec_b}) fill(*w, h);
  for (Tensor* b : {&p.enc_fwd_b, &p.enc_bwd_b, &p.dec_b})
    for (std::size_t i = h; i < 2 * h; ++i) (*b)[i] = 1.0;
  fill(p.bridge_w, 4 * h);
  fill(p.bridge_b, 4 * h);
  fill(p.dec_start, cfg.d_txt);
  fill(p.attn_enc, 2 * h);
  fill(p.attn_dec, h);
  fill(p.attn_eos, cfg.d_txt);
  fill(p.text_proj, 5 * h);
  fill(p.mask_embedding, cfg.d_in);
  // EOS head starts at p = 0.5 everywhere.
  p.eos_w.fill(0.0);
  p.eos_b.fill(0.0);
  return p;
}

void check_shapes(const AdapterParams& params, const AdapterConfig& cfg) {
  const auto shapes = expected_shapes(cfg);
  params.visit([&](const char* name, const Tensor& t) {
    const Shape& want = shapes.by_name.at(name);
    if (t.shape() != want) {
      throw DataError(std::string("parameter ") + name + " has shape " + shape_str(t.shape()) + ", expected " +
                      shape_str(want));
    }
    if (!t.all_finite()) throw DataError(std::string("parameter ") + name + " has non-finite values");
  });
}

AdapterConfig dims_from(const AdapterParams& params, AdapterConfig base) {
  if (params.mask_embedding.rank() != 1 || params.dec_start.rank() != 1 || params.attn_dec.rank() != 2) {
    throw DataError("adapter parameters are incomplete");
  }
  base.d_in = params.mask_embedding.dim(0);
  base.d_txt = params.dec_start.dim(0);
  base.d_h = params.attn_dec.dim(0);
  if (params.conv1_w.rank() == 2 && base.d_in > 0) base.conv_kernel = params.conv1_w.dim(1) / base.d_in;
  check_shapes(params, base);
  return base;
}

AdapterVars bind(Tape& tape, const AdapterParams& params, const std::set<std::string>& frozen) {
  std::vector<Var> vars;
  params.visit([&](const char* name, const Tensor& t) { vars.push_back(tape.leaf(t, !frozen.contains(name))); });
  AdapterVars v;
  std::size_t i = 0;
  v.visit([&](const char*, Var& slot) { slot = vars[i++]; });
  return v;
}

void to_dir(const AdapterParams& params, TensorDir& dir) {
  params.visit([&](const char* name, const Tensor& t) { dir.tensors.push_back({name, t}); });
}

AdapterParams from_dir(const TensorDir& dir) {
  AdapterParams p;
  p.visit([&](const char* name, Tensor& t) { t = dir.get(name); });
  dims_from(p);
  return p;
}

}  // namespace s2t
