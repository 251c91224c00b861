// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "s2t/numerics/tensor.hpp"

// CMTF1 tensor files: "CMTF", u8 version (1), u8 rank, rank x u32 LE dims,
// then row-major f32 LE payload. Values are narrowed to f32 on write and
// widened back to f64 on read.
namespace s2t::cmtf {

std::vector<std::uint8_t> encode(const Tensor& t);
Tensor decode(std::span<const std::uint8_t> bytes);

void write(const std::filesystem::path& path, const Tensor& t);
Tensor read(const std::filesystem::path& path);

/// Rounds every value through f32, i.e. what a write/read cycle yields.
Tensor round_to_f32(const Tensor& t);

}  // namespace s2t::cmtf
