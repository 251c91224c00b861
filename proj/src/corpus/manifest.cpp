// SPDX-License-Identifier: Apache-2.0
#include "s2t/corpus/manifest.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "json.hpp"
#include "s2t/error.hpp"
#include "s2t/numerics/cmtf.hpp"
#include "s2t/numerics/random.hpp"
#include "s2t/texteval/text.hpp"

namespace s2t {
namespace {

using nlohmann::json;

std::string str_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) return {};
  if (!j[key].is_string()) throw DataError(where + ": field '" + key + "' must be a string");
  return j[key].get<std::string>();
}

}  // namespace

std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest " + path.string());
  std::vector<ManifestRecord> out;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
    if (!j.is_object()) throw DataError(where + ": expected a JSON object");
    ManifestRecord r;
    r.id = str_field(j, "id", where);
    if (r.id.empty()) throw DataError(where + ": missing id");
    if (!seen.insert(r.id).second) throw DataError(where + ": duplicate id '" + r.id + "'");
    r.transcript = str_field(j, "transcript", where);
    r.article_body = str_field(j, "article_body", where);
    r.summary = str_field(j, "summary", where);
    if (j.contains("feature_path") && !j["feature_path"].is_null()) r.feature_path = str_field(j, "feature_path", where);
    if (j.contains("embedding_path") && !j["embedding_path"].is_null())
      r.embedding_path = str_field(j, "embedding_path", where);
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write manifest " + path.string());
  for (const auto& r : records) {
    json j = {{"id", r.id}, {"transcript", r.transcript}, {"article_body", r.article_body}, {"summary", r.summary}};
    if (r.feature_path) j["feature_path"] = *r.feature_path;
    if (r.embedding_path) j["embedding_path"] = *r.embedding_path;
    out << j.dump() << '\n';
  }
  if (!out) throw DataError("write failed for " + path.string());
}

std::map<std::string, std::string> read_hypotheses(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open hypotheses " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected id<TAB>text");
    }
    out[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return out;
}

FilterResult filter_by_wer(const std::vector<ManifestRecord>& records,
                           const std::map<std::string, std::string>& hypotheses, double threshold) {
  std::string missing;
  for (const auto& r : records)
    if (!hypotheses.contains(r.id)) missing += (missing.empty() ? "" : ", ") + r.id;
  if (!missing.empty()) throw DataError("no ASR hypothesis for: " + missing);

  FilterResult res;
  for (const auto& r : records) {
    WerReportRow row{r.id, wer(normalize_text(r.article_body), normalize_text(hypotheses.at(r.id))), false};
    row.kept = row.wer <= threshold;
    if (row.kept) res.kept.push_back(r);
    res.report.push_back(row);
  }
  return res;
}

void SplitSpec::validate() const {
  if (!(train > 0.0 && dev > 0.0 && test > 0.0)) throw ConfigError("split ratios must be positive");
  if (std::abs(train + dev + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

Splits split(std::vector<ManifestRecord> records, const SplitSpec& spec) {
  spec.validate();
  if (records.size() < 3) throw DataError("split needs at least 3 records");
  rnd::Engine rng(spec.seed);
  for (std::size_t i = records.size(); i > 1; --i) std::swap(records[i - 1], records[rnd::below(rng, i)]);

  const double n = static_cast<double>(records.size());
  // The small slack keeps exact products such as 16725 * (1672/16725) from
  // flooring one short.
  const auto n_dev = static_cast<std::size_t>(std::floor(n * spec.dev + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * spec.test + 1e-9));
  const std::size_t n_train = records.size() - n_dev - n_test;

  Splits s;
  auto it = records.begin();
  s.train.assign(std::make_move_iterator(it), std::make_move_iterator(it + n_train));
  it += n_train;
  s.dev.assign(std::make_move_iterator(it), std::make_move_iterator(it + n_dev));
  it += n_dev;
  s.test.assign(std::make_move_iterator(it), std::make_move_iterator(records.end()));
  return s;
}

std::vector<Example> load_examples(const std::filesystem::path& manifest) {
  const auto base = manifest.parent_path();
  std::vector<Example> out;
  for (const auto& r : read_manifest(manifest)) {
    if (!r.feature_path || !r.embedding_path) {
      throw DataError(manifest.string() + ": record '" + r.id + "' lacks feature_path or embedding_path");
    }
    Example e{r.id, cmtf::read(base / *r.feature_path), cmtf::read(base / *r.embedding_path), r.summary};
    if (e.features.rank() != 2 || e.target.rank() != 2 || e.features.dim(0) == 0 || e.target.dim(0) == 0) {
      throw DataError("record '" + r.id + "': features and embeddings must be non-empty matrices");
    }
    out.push_back(std::move(e));
  }
  if (!out.empty()) {
    for (const auto& e : out) {
      if (e.features.dim(1) != out[0].features.dim(1) || e.target.dim(1) != out[0].target.dim(1)) {
        throw DataError("record '" + e.id + "': feature or embedding width differs from the first record");
      }
    }
  }
  return out;
}

}  // namespace s2t
