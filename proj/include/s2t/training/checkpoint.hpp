// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "s2t/adapter/params.hpp"
#include "s2t/training/norm.hpp"
#include "s2t/training/text_decoder.hpp"

namespace s2t {

/// Everything a training stage reads and writes: adapter weights, the
/// normalization statistics, an optional text decoder and the last completed
/// stage ("" for a fresh initialization).
struct Checkpoint {
  AdapterConfig config;
  AdapterParams adapter;
  std::optional<NormStats> feature_norm;
  std::optional<NormStats> embedding_norm;
  std::optional<TextDecoder> text;
  std::string stage;
};

/// Writes a tensor directory. `extra_meta` is stored alongside.
void save_checkpoint(const std::filesystem::path& dir, const Checkpoint& ck,
                     const std::map<std::string, std::string>& extra_meta = {});
Checkpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace s2t
