// SPDX-License-Identifier: Apache-2.0
#include "s2t/corpus/synth.hpp"

#include <cmath>

#include "s2t/error.hpp"
#include "s2t/numerics/cmtf.hpp"
#include "s2t/numerics/random.hpp"
#include "s2t/numerics/tensor_dir.hpp"

namespace s2t {

void SynthConfig::validate() const {
  if (d_in < 2 || d_txt < 2) throw ConfigError("synth: d_in and d_txt must be >= 2");
  if (l_min < 1 || l_max < l_min) throw ConfigError("synth: need 1 <= l_min <= l_max");
  if (n_train < 1 || n_val < 1) throw ConfigError("synth: n_train and n_val must be >= 1");
  if (vocab < 1 || vocab > d_txt) throw ConfigError("synth: vocab must lie in [1, d_txt]");
  if (!(smoothing >= 0.0 && smoothing < 1.0)) throw ConfigError("synth: smoothing must lie in [0, 1)");
  if (rule != "local-average-linear") throw ConfigError("synth: unknown rule '" + rule + "'");
}

std::size_t synth_target_length(std::size_t length) { return (length + 7) / 8 + 1; }

Tensor teacher_targets(const SynthTeacher& teacher, const Tensor& x) {
  const std::size_t L = x.dim(0), d = x.dim(1), n_u = (L + 3) / 4, T = synth_target_length(L);
  if (teacher.a.dim(1) != 2 * d) throw DataError("teacher map does not match feature width");
  std::vector<std::vector<double>> u(n_u + 1, std::vector<double>(d, 0.0));
  for (std::size_t j = 0; j < n_u; ++j) {
    const std::size_t lo = 4 * j, hi = std::min(L, lo + 4);
    for (std::size_t r = lo; r < hi; ++r)
      for (std::size_t c = 0; c < d; ++c) u[j][c] += x.at(r, c) / static_cast<double>(hi - lo);
  }
  const std::size_t d_txt = teacher.a.dim(0);
  Tensor y({T, d_txt});
  for (std::size_t t = 0; t + 1 < T; ++t) {
    const auto& u1 = u[2 * t];
    const auto& u2 = u[std::min(2 * t + 1, n_u)];  // index n_u is the zero row
    for (std::size_t o = 0; o < d_txt; ++o) {
      double acc = 0.0;
      for (std::size_t c = 0; c < d; ++c) acc += teacher.a.at(o, c) * u1[c] + teacher.a.at(o, d + c) * u2[c];
      y.at(t, o) = acc;
    }
  }
  for (std::size_t o = 0; o < d_txt; ++o) y.at(T - 1, o) = teacher.end_marker[o];
  return cmtf::round_to_f32(y);
}

std::string synth_summary(const Tensor& target, std::size_t vocab) {
  std::string out;
  for (std::size_t t = 0; t + 1 < target.rows(); ++t) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < vocab; ++k)
      if (target.at(t, k) > target.at(t, best)) best = k;
    if (!out.empty()) out += ' ';
    out += "w" + std::to_string(best);
  }
  return out;
}

SynthData synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  rnd::Engine rng(cfg.seed);
  SynthData data;
  data.teacher.a = Tensor({cfg.d_txt, 2 * cfg.d_in});
  const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.d_in));
  for (double& v : data.teacher.a.data()) v = scale * rnd::normal(rng);
  data.teacher.a = cmtf::round_to_f32(data.teacher.a);
  data.teacher.end_marker = Tensor({cfg.d_txt});
  for (double& v : data.teacher.end_marker.data()) v = 2.0 * rnd::normal(rng);
  data.teacher.end_marker = cmtf::round_to_f32(data.teacher.end_marker);

  const double rho = cfg.smoothing, innov = std::sqrt(1.0 - rho * rho);
  const std::pair<const char*, std::size_t> parts[] = {{"train", cfg.n_train}, {"val", cfg.n_val}, {"test", cfg.n_test}};
  for (const auto& [name, count] : parts) {
    SynthSplit split{name, {}};
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t L = cfg.l_min + rnd::below(rng, cfg.l_max - cfg.l_min + 1);
      Tensor x({L, cfg.d_in});
      for (std::size_t c = 0; c < cfg.d_in; ++c) {
        double prev = rnd::normal(rng);
        for (std::size_t t = 0; t < L; ++t) {
          x.at(t, c) = prev;
          prev = rho * prev + innov * rnd::normal(rng);
        }
      }
      x = cmtf::round_to_f32(x);
      Tensor y = teacher_targets(data.teacher, x);
      std::string summary = synth_summary(y, cfg.vocab);
      char id[32];
      std::snprintf(id, sizeof id, "%s-%05zu", name, i);
      split.examples.push_back({id, std::move(x), std::move(y), std::move(summary)});
    }
    data.splits.push_back(std::move(split));
  }
  return data;
}

void write_synth(const std::filesystem::path& dir, const SynthConfig& cfg, const SynthData& data) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "features");
  fs::create_directories(dir / "embeddings");
  for (const auto& split : data.splits) {
    std::vector<ManifestRecord> records;
    for (const auto& e : split.examples) {
      const std::string f = "features/" + e.id + ".cmtf", y = "embeddings/" + e.id + ".cmtf";
      cmtf::write(dir / f, e.features);
      cmtf::write(dir / y, e.target);
      records.push_back({e.id, e.summary, e.summary, e.summary, f, y});
    }
    write_manifest(dir / (split.name + ".jsonl"), records);
  }
  TensorDir t;
  t.meta = {{"rule", cfg.rule},
            {"seed", std::to_string(cfg.seed)},
            {"d_in", std::to_string(cfg.d_in)},
            {"d_txt", std::to_string(cfg.d_txt)},
            {"vocab", std::to_string(cfg.vocab)}};
  t.tensors = {{"A", data.teacher.a}, {"end_marker", data.teacher.end_marker}};
  save_tensor_dir(dir / "teacher", t);
}

SynthTeacher read_teacher(const std::filesystem::path& dir) {
  const TensorDir t = load_tensor_dir(dir);
  return {t.get("A"), t.get("end_marker")};
}

}  // namespace s2t
