// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2t/numerics/tensor.hpp"

namespace s2t {

struct ManifestRecord {
  std::string id;
  std::string transcript;
  std::string article_body;
  std::string summary;
  std::optional<std::string> feature_path;    ///< CMTF1, relative to the manifest's directory
  std::optional<std::string> embedding_path;  ///< CMTF1, relative to the manifest's directory
  bool operator==(const ManifestRecord&) const = default;
};

/// One JSON object per line. Throws DataError (with the line number) on
/// malformed lines, missing ids or duplicate ids.
std::vector<ManifestRecord> read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

/// "id<TAB>text" per line.
std::map<std::string, std::string> read_hypotheses(const std::filesystem::path& path);

struct WerReportRow {
  std::string id;
  double wer = 0.0;
  bool kept = false;
};

struct FilterResult {
  std::vector<ManifestRecord> kept;
  std::vector<WerReportRow> report;  ///< input order
};

/// Keeps a record iff wer(normalize(article_body), normalize(hypothesis)) <= threshold.
/// Throws DataError listing every record without a hypothesis.
FilterResult filter_by_wer(const std::vector<ManifestRecord>& records,
                           const std::map<std::string, std::string>& hypotheses, double threshold);

struct SplitSpec {
  double train = 0.8, dev = 0.1, test = 0.1;
  std::uint64_t seed = 0;
  void validate() const;
};

struct Splits {
  std::vector<ManifestRecord> train, dev, test;
};

/// Seeded Fisher-Yates shuffle, then contiguous cuts: dev and test get
/// floor(n * ratio) records, train the remainder.
Splits split(std::vector<ManifestRecord> records, const SplitSpec& spec);

/// A loaded training example: features [L x d_in], target embeddings [T x d_txt].
struct Example {
  std::string id;
  Tensor features;
  Tensor target;
  std::string summary;
};

/// Reads a manifest and the CMTF files it references. Every record must
/// carry both paths.
std::vector<Example> load_examples(const std::filesystem::path& manifest);

}  // namespace s2t
