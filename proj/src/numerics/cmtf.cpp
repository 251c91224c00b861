// SPDX-License-Identifier: Apache-2.0
#include "s2t/numerics/cmtf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "s2t/error.hpp"

namespace s2t::cmtf {
namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'M', 'T', 'F'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<std::uint8_t> encode(const Tensor& t) {
  if (t.rank() > 255) throw DataError("CMTF1: rank exceeds 255");
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.push_back(kVersion);
  out.push_back(static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw DataError("CMTF1: dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + 4 * t.size());
  for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return out;
}

Tensor decode(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 6 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw DataError("CMTF1: bad magic");
  if (bytes[4] != kVersion) throw DataError("CMTF1: unsupported version " + std::to_string(bytes[4]));
  const std::size_t rank = bytes[5];
  std::size_t off = 6;
  if (bytes.size() < off + 4 * rank) throw DataError("CMTF1: truncated header");
  Shape shape(rank);
  for (std::size_t i = 0; i < rank; ++i, off += 4) shape[i] = get_u32(bytes, off);
  const std::size_t n = shape_numel(shape);
  if (bytes.size() != off + 4 * n) {
    throw DataError("CMTF1: payload size mismatch for shape " + shape_str(shape));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i, off += 4) {
    data[i] = static_cast<double>(std::bit_cast<float>(get_u32(bytes, off)));
  }
  return Tensor(std::move(shape), std::move(data));
}

void write(const std::filesystem::path& path, const Tensor& t) {
  const auto bytes = encode(t);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot write " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw DataError("write failed: " + path.string());
}

Tensor read(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot read " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

Tensor round_to_f32(const Tensor& t) {
  Tensor out = t;
  for (double& v : out.data()) v = static_cast<double>(static_cast<float>(v));
  return out;
}

}  // namespace s2t::cmtf
