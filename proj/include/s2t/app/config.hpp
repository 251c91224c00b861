// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "s2t/adapter/params.hpp"
#include "s2t/corpus/synth.hpp"
#include "s2t/texteval/extractive.hpp"
#include "s2t/training/stage.hpp"

namespace s2t::app {

// Config files are INI-like:
//
//   # comment
//   [section]
//   key = value
//
// Sections: run, adapter, synth, data, train, stage1, stage2, stage3, joint,
// baseline. Unknown sections or keys, duplicates and malformed values are
// rejected with the file, line and key in the message.

struct DataPaths {
  std::string train, val, test;  ///< as written; relative to the config file
};

struct RunConfig {
  std::uint64_t seed = 1;                ///< adapter init; stage seeds derive from it
  std::vector<Stage> pipeline{Stage::One, Stage::Two, Stage::Three};
  std::optional<AdapterConfig> adapter;  ///< present iff [adapter] given
  std::optional<SynthConfig> synth;      ///< present iff [synth] given
  DataPaths data;
  std::map<Stage, StageConfig> stages;   ///< always all four, fully resolved
  ExtractiveConfig extractive;
  std::filesystem::path base_dir;        ///< directory of the parsed file (not serialized)

  const StageConfig& stage(Stage s) const { return stages.at(s); }
  std::filesystem::path resolve(const std::string& path) const;
};

RunConfig parse_config(const std::filesystem::path& file);
/// `origin` names the source in error messages.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>",
                            const std::filesystem::path& base_dir = {});

/// Canonical text form with every value explicit.
std::string serialize_config(const RunConfig& cfg);
bool operator==(const RunConfig& a, const RunConfig& b);

/// 16 hex digits of FNV-1a over the canonical text.
std::string config_hash(const RunConfig& cfg);

/// Fails with ConfigError when a command needs [adapter] and it is missing.
const AdapterConfig& require_adapter(const RunConfig& cfg);

}  // namespace s2t::app
