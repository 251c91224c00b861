// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "s2t/corpus/manifest.hpp"

// Seeded synthetic speech-to-embedding task with a known teacher mapping.
//
// Features are AR(1)-smoothed Gaussian sequences. With u_j the mean of
// frames 4j-3..4j (1-based, clipped at the end, zero past it), the target is
//   y_t = A [u_{2t-1} | u_{2t}],  t = 1..ceil(L/8),
// followed by one fixed end-marker row, so T = ceil(L/8) + 1.
// Everything persisted is rounded to f32.
namespace s2t {

struct SynthConfig {
  std::size_t d_in = 16;
  std::size_t d_txt = 8;
  std::size_t l_min = 24;
  std::size_t l_max = 64;
  std::string rule = "local-average-linear";
  std::size_t n_train = 500;
  std::size_t n_val = 100;
  std::size_t n_test = 0;
  std::size_t vocab = 4;  ///< summary tokens are w<argmax over the first `vocab` dims>
  double smoothing = 0.7;
  std::uint64_t seed = 1;
  void validate() const;
};

struct SynthTeacher {
  Tensor a;           ///< [d_txt x 2 d_in]
  Tensor end_marker;  ///< [d_txt]
};

std::size_t synth_target_length(std::size_t length);

/// Targets for features x under the teacher, rounded to f32.
Tensor teacher_targets(const SynthTeacher& teacher, const Tensor& x);

/// Summary text for a target sequence (end marker row excluded).
std::string synth_summary(const Tensor& target, std::size_t vocab);

struct SynthSplit {
  std::string name;
  std::vector<Example> examples;
};

struct SynthData {
  SynthTeacher teacher;
  std::vector<SynthSplit> splits;  ///< train, val, test (test may be empty)
};

SynthData synth_generate(const SynthConfig& cfg);

/// Writes <dir>/{train,val,test}.jsonl, features/ and embeddings/ CMTF files,
/// and the teacher as a tensor directory under <dir>/teacher.
void write_synth(const std::filesystem::path& dir, const SynthConfig& cfg, const SynthData& data);

SynthTeacher read_teacher(const std::filesystem::path& dir);

}  // namespace s2t
