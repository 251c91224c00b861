// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/checkpoint.hpp"

#include <cstdio>

#include "s2t/error.hpp"

namespace s2t {
namespace {

void put_norm(TensorDir& dir, const std::string& prefix, const NormStats& s) {
  dir.tensors.push_back({prefix + ".mean", s.mean});
  dir.tensors.push_back({prefix + ".std", s.std});
}

std::optional<NormStats> get_norm(const TensorDir& dir, const std::string& prefix) {
  const Tensor* m = dir.find(prefix + ".mean");
  const Tensor* s = dir.find(prefix + ".std");
  if (!m && !s) return std::nullopt;
  if (!m || !s || m->shape() != s->shape() || m->rank() != 1) throw DataError(prefix + ": incomplete statistics");
  return NormStats{*m, *s, {}};
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T meta_number(const TensorDir& dir, const std::string& key, T fallback) {
  auto it = dir.meta.find(key);
  if (it == dir.meta.end()) return fallback;
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(std::stod(it->second));
    } else {
      return static_cast<T>(std::stoull(it->second));
    }
  } catch (const std::exception&) {
    throw DataError("checkpoint metadata '" + key + "' is not a number: " + it->second);
  }
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ck,
                     const std::map<std::string, std::string>& extra_meta) {
  TensorDir d;
  d.meta = extra_meta;
  d.meta["stage"] = ck.stage.empty() ? "init" : ck.stage;
  d.meta["eos_window"] = std::to_string(ck.config.eos_window);
  d.meta["t_max"] = std::to_string(ck.config.t_max);
  d.meta["pi"] = fmt(ck.config.pi);
  d.meta["conv_stride"] = std::to_string(ck.config.conv_stride);
  to_dir(ck.adapter, d);
  if (ck.feature_norm) put_norm(d, "norm.features", *ck.feature_norm);
  if (ck.embedding_norm) put_norm(d, "norm.embeddings", *ck.embedding_norm);
  if (ck.text) to_dir(*ck.text, d);
  save_tensor_dir(dir, d);
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
  const TensorDir d = load_tensor_dir(dir);
  Checkpoint ck;
  AdapterConfig base;
  base.eos_window = meta_number<std::size_t>(d, "eos_window", base.eos_window);
  base.t_max = meta_number<std::size_t>(d, "t_max", base.t_max);
  base.pi = meta_number<double>(d, "pi", base.pi);
  base.conv_stride = meta_number<std::size_t>(d, "conv_stride", base.conv_stride);
  ck.adapter = from_dir(d);
  ck.config = dims_from(ck.adapter, base);
  ck.feature_norm = get_norm(d, "norm.features");
  ck.embedding_norm = get_norm(d, "norm.embeddings");
  TextDecoder text;
  if (from_dir(d, text)) ck.text = std::move(text);
  auto it = d.meta.find("stage");
  ck.stage = it == d.meta.end() || it->second == "init" ? "" : it->second;
  return ck;
}

}  // namespace s2t
