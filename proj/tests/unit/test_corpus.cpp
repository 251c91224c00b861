// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "doctest.h"
#include "s2t/corpus/manifest.hpp"
#include "s2t/corpus/synth.hpp"
#include "s2t/error.hpp"
#include "s2t/numerics/cmtf.hpp"
#include "s2t/texteval/text.hpp"

using namespace s2t;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("s2t_corpus_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<ManifestRecord> numbered(std::size_t n) {
  std::vector<ManifestRecord> r;
  for (std::size_t i = 0; i < n; ++i) r.push_back({"r" + std::to_string(i), "", "body " + std::to_string(i), "", {}, {}});
  return r;
}

std::set<std::string> ids(const std::vector<ManifestRecord>& r) {
  std::set<std::string> s;
  for (const auto& x : r) s.insert(x.id);
  return s;
}

}  // namespace

TEST_CASE("manifest round trip and validation") {
  const auto dir = scratch("manifest");
  std::vector<ManifestRecord> recs{{"a", "t \"quoted\"", "body\nline", "sum", "f/a.cmtf", {}},
                                   {"b", "é", "", "", {}, "e/b.cmtf"}};
  write_manifest(dir / "m.jsonl", recs);
  CHECK(read_manifest(dir / "m.jsonl") == recs);

  std::ofstream(dir / "dup.jsonl") << "{\"id\":\"x\"}\n{\"id\":\"x\"}\n";
  CHECK_THROWS_WITH_AS(read_manifest(dir / "dup.jsonl"), doctest::Contains("duplicate id 'x'"), DataError);
  std::ofstream(dir / "bad.jsonl") << "{\"id\":\"x\"}\n{oops\n";
  CHECK_THROWS_WITH_AS(read_manifest(dir / "bad.jsonl"), doctest::Contains(":2:"), DataError);
  CHECK_THROWS_AS(read_manifest(dir / "missing.jsonl"), DataError);
}

TEST_CASE("filter_by_wer") {
  const std::string body = "one two three four five six seven eight nine ten "
                           "eleven twelve thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty";
  // Nine substitutions out of twenty words: WER 0.45 exactly.
  const std::string nine_off = "x x x x x x x x x ten "
                               "eleven twelve thirteen fourteen fifteen sixteen seventeen eighteen nineteen twenty";
  std::vector<ManifestRecord> recs{{"same", "", body, "", {}, {}},
                                   {"edge", "", body, "", {}, {}},
                                   {"bad", "", "a b c", "", {}, {}}};
  std::map<std::string, std::string> hyps{{"same", body}, {"edge", nine_off}, {"bad", "a x y"}};
  auto res = filter_by_wer(recs, hyps, 0.45);
  CHECK(res.report[1].wer == 0.45);
  CHECK(res.report[2].wer == 2.0 / 3.0);
  CHECK(ids(res.kept) == std::set<std::string>{"same", "edge"});
  CHECK(filter_by_wer(recs, hyps, 0.0).kept.size() == 1);

  hyps.erase("bad");
  hyps.erase("edge");
  CHECK_THROWS_WITH_AS(filter_by_wer(recs, hyps, 0.45), doctest::Contains("edge, bad"), DataError);
}

TEST_CASE("filter_by_wer is monotone in the threshold") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> w(0, 3), len(1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ManifestRecord> recs;
    std::map<std::string, std::string> hyps;
    for (int i = 0; i < 20; ++i) {
      std::string b, h;
      for (int k = len(rng); k > 0; --k) b += "w" + std::to_string(w(rng)) + " ";
      for (int k = len(rng); k > 0; --k) h += "w" + std::to_string(w(rng)) + " ";
      recs.push_back({"r" + std::to_string(i), "", b, "", {}, {}});
      hyps["r" + std::to_string(i)] = h;
    }
    std::set<std::string> prev;
    for (double th = 0.0; th <= 3.0; th += 0.05) {
      const auto kept = ids(filter_by_wer(recs, hyps, th).kept);
      CHECK(std::includes(kept.begin(), kept.end(), prev.begin(), prev.end()));
      prev = kept;
    }
  }
}

TEST_CASE("split") {
  auto s = split(numbered(10), {0.8, 0.1, 0.1, 7});
  CHECK(s.train.size() == 8);
  CHECK(s.dev.size() == 1);
  CHECK(s.test.size() == 1);

  auto again = split(numbered(10), {0.8, 0.1, 0.1, 7});
  CHECK(again.train == s.train);
  CHECK(again.dev == s.dev);
  CHECK(again.test == s.test);
  CHECK(split(numbered(10), {0.8, 0.1, 0.1, 8}).train != s.train);

  const double n = 16725.0;
  auto big = split(numbered(16725), {13380.0 / n, 1672.0 / n, 1673.0 / n, 0});
  CHECK(big.train.size() == 13380);
  CHECK(big.dev.size() == 1672);
  CHECK(big.test.size() == 1673);

  for (std::size_t count : {3, 4, 17, 101}) {
    auto p = split(numbered(count), {0.5, 0.25, 0.25, count});
    auto all = ids(p.train);
    const auto d = ids(p.dev), t = ids(p.test);
    all.insert(d.begin(), d.end());
    all.insert(t.begin(), t.end());
    CHECK(all == ids(numbered(count)));
    CHECK(p.train.size() + p.dev.size() + p.test.size() == count);
  }
  CHECK_THROWS_AS(split(numbered(2), {}), DataError);
  CHECK_THROWS_AS(split(numbered(5), {0.5, 0.5, 0.1, 0}), ConfigError);
  CHECK_THROWS_AS(split(numbered(5), {1.0, 0.0, 0.0, 0}), ConfigError);
}

TEST_CASE("synthetic task") {
  CHECK(synth_target_length(32) == 5);
  CHECK(synth_target_length(1) == 2);
  CHECK(synth_target_length(33) == 6);

  SynthConfig cfg;
  cfg.n_train = 6;
  cfg.n_val = 3;
  cfg.n_test = 2;
  const SynthData a = synth_generate(cfg), b = synth_generate(cfg);
  REQUIRE(a.splits.size() == 3);
  CHECK(a.teacher.a == b.teacher.a);
  for (std::size_t s = 0; s < 3; ++s) {
    REQUIRE(a.splits[s].examples.size() == b.splits[s].examples.size());
    for (std::size_t i = 0; i < a.splits[s].examples.size(); ++i) {
      const auto& e = a.splits[s].examples[i];
      CHECK(e.features == b.splits[s].examples[i].features);
      CHECK(e.target == b.splits[s].examples[i].target);
      CHECK(e.features.dim(1) == 16);
      CHECK(e.target.dim(0) == synth_target_length(e.features.dim(0)));
      CHECK(e.target.dim(1) == 8);
      CHECK(e.features.dim(0) >= cfg.l_min);
      CHECK(e.features.dim(0) <= cfg.l_max);
      CHECK(teacher_targets(a.teacher, e.features) == e.target);
      CHECK(e.target.row_tensor(e.target.rows() - 1) == a.teacher.end_marker);
      CHECK(normalize_text(e.summary).size() == e.target.rows() - 1);
    }
  }
  cfg.seed = 2;
  CHECK(synth_generate(cfg).teacher.a != a.teacher.a);
}

TEST_CASE("teacher mapping by hand") {
  SynthTeacher t;
  // d_in = 1, d_txt = 2: y = [u1 + 10 u2, u1 - u2].
  t.a = Tensor::matrix(2, 2, {1.0, 10.0, 1.0, -1.0});
  t.end_marker = Tensor::vector({7.0, -7.0});
  Tensor x({10, 1});
  for (std::size_t i = 0; i < 10; ++i) x[i] = static_cast<double>(i + 1);
  // u = mean(1..4)=2.5, mean(5..8)=6.5, mean(9,10)=9.5; T = 3.
  const Tensor y = teacher_targets(t, x);
  CHECK(y == Tensor::matrix(3, 2, {2.5 + 65.0, 2.5 - 6.5, 9.5, 9.5, 7.0, -7.0}));
}

TEST_CASE("synthetic data on disk") {
  const auto dir = scratch("synth");
  SynthConfig cfg;
  cfg.n_train = 4;
  cfg.n_val = 2;
  const SynthData data = synth_generate(cfg);
  write_synth(dir, cfg, data);
  const auto train = load_examples(dir / "train.jsonl");
  REQUIRE(train.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(train[i].id == data.splits[0].examples[i].id);
    CHECK(train[i].features == data.splits[0].examples[i].features);
    CHECK(train[i].target == data.splits[0].examples[i].target);
  }
  const SynthTeacher t = read_teacher(dir / "teacher");
  CHECK(t.a == data.teacher.a);
  for (const auto& e : load_examples(dir / "val.jsonl")) CHECK(teacher_targets(t, e.features) == e.target);
  CHECK(load_examples(dir / "test.jsonl").empty());

  write_manifest(dir / "nopaths.jsonl", {{"z", "", "", "", {}, {}}});
  CHECK_THROWS_AS(load_examples(dir / "nopaths.jsonl"), DataError);
}
