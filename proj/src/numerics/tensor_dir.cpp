// SPDX-License-Identifier: Apache-2.0
#include "s2t/numerics/tensor_dir.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "s2t/error.hpp"
#include "s2t/numerics/cmtf.hpp"

namespace s2t {
namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string shape_field(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out.empty() ? "scalar" : out;
}

}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed) {
  auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t tensor_hash(const Tensor& t) {
  std::uint64_t h = fnv1a64(t.shape().data(), t.shape().size() * sizeof(std::size_t));
  return fnv1a64(t.data().data(), t.size() * sizeof(double), h);
}

const Tensor* TensorDir::find(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return &t.value;
  return nullptr;
}

const Tensor& TensorDir::get(const std::string& name) const {
  if (const Tensor* t = find(name)) return *t;
  throw DataError("tensor '" + name + "' missing");
}

void save_tensor_dir(const std::filesystem::path& dir, const TensorDir& contents) {
  std::filesystem::create_directories(dir);
  std::ostringstream manifest;
  manifest << "# name\tshape\tfnv1a64\n";
  for (const auto& [k, v] : contents.meta) manifest << "@" << k << "\t" << v << "\n";
  for (const auto& t : contents.tensors) {
    const auto bytes = cmtf::encode(t.value);
    const auto path = dir / (t.name + ".cmtf");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw DataError("write failed: " + path.string());
    manifest << t.name << "\t" << shape_field(t.value.shape()) << "\t" << hex64(fnv1a64(bytes.data(), bytes.size()))
             << "\n";
  }
  std::ofstream m(dir / "manifest.txt", std::ios::trunc);
  m << manifest.str();
  if (!m) throw DataError("write failed: " + (dir / "manifest.txt").string());
}

TensorDir load_tensor_dir(const std::filesystem::path& dir) {
  std::ifstream m(dir / "manifest.txt");
  if (!m) throw DataError("missing manifest in " + dir.string());
  TensorDir out;
  std::string line;
  while (std::getline(m, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string a, b, c;
    std::getline(ss, a, '\t');
    std::getline(ss, b, '\t');
    if (a[0] == '@') {
      out.meta[a.substr(1)] = b;
      continue;
    }
    std::getline(ss, c, '\t');
    const auto path = dir / (a + ".cmtf");
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("missing tensor file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    if (hex64(fnv1a64(bytes.data(), bytes.size())) != c) throw DataError("checksum mismatch for " + path.string());
    Tensor t = cmtf::decode(bytes);
    if (shape_field(t.shape()) != b) throw DataError("shape mismatch for " + path.string());
    out.tensors.push_back({a, std::move(t)});
  }
  return out;
}

}  // namespace s2t
