// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "s2t/numerics/grad_check.hpp"

namespace s2t {

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
/// Hash of a tensor's shape and f64 payload.
std::uint64_t tensor_hash(const Tensor& t);

/// A directory of named CMTF1 tensors plus `manifest.txt` listing
/// name, shape and checksum of each file. Metadata lines start with '@'.
struct TensorDir {
  std::map<std::string, std::string> meta;
  std::vector<NamedTensor> tensors;

  const Tensor* find(const std::string& name) const;
  const Tensor& get(const std::string& name) const;
};

void save_tensor_dir(const std::filesystem::path& dir, const TensorDir& contents);
/// Verifies every checksum listed in the manifest.
TensorDir load_tensor_dir(const std::filesystem::path& dir);

}  // namespace s2t
