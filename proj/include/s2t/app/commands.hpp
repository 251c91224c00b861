// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s2t/app/config.hpp"
#include "s2t/inference/generate.hpp"
#include "s2t/texteval/text.hpp"
#include "s2t/training/checkpoint.hpp"

namespace s2t::app {

namespace fs = std::filesystem;

/// Writes a JSON run-metadata file (command, config hash, seed, library
/// versions, creation time).
void write_run_metadata(const fs::path& path, const std::string& command, const std::string& config_hash,
                        std::uint64_t seed);

void prep_filter(const fs::path& manifest, const fs::path& hyps, double threshold, const fs::path& out,
                 std::ostream& log);
void prep_split(const fs::path& manifest, const std::vector<double>& ratios, std::uint64_t seed,
                const fs::path& out_dir, std::ostream& log);

void synth_gen(const RunConfig& cfg, const fs::path& out);

struct TrainPaths {
  std::optional<fs::path> init;  ///< checkpoint to start from; fresh init for stage 1 when absent
  std::optional<fs::path> train, val;  ///< override [data]
  fs::path out;
};
/// Runs one stage and writes the best checkpoint plus metrics.tsv to
/// paths.out. On divergence the last good checkpoint is still written and
/// NumericError is thrown.
StageResult train_stage(Stage stage, const RunConfig& cfg, const TrainPaths& paths);

/// Reads raw features, normalizes them with the checkpoint's statistics and
/// writes the truncated embeddings (CMTF) plus `<out>.eos.tsv`.
GenerationResult infer(const fs::path& features, const fs::path& params, std::optional<double> pi,
                       std::optional<std::size_t> t_max, const fs::path& out);

/// Line-aligned documents. One line prints the value; several print
/// "mean ± half-width".
MeanCi eval_wer(const fs::path& ref, const fs::path& hyp, std::ostream& out);
void eval_rouge(const fs::path& ref, const fs::path& hyp, bool whole_file, std::ostream& out);
double eval_pwcca(const fs::path& x, const fs::path& y, std::ostream& out);

void baseline_extractive(const fs::path& manifest, const std::string& field, const ExtractiveConfig& cfg,
                         const fs::path& out, const std::optional<fs::path>& refs_out);

struct PipelineReport {
  double val_mse_init = 0.0;   ///< teacher-forced, normalized space
  double val_mse_final = 0.0;  ///< after the last MSE stage
  double eos_within_one = 0.0;  ///< fraction of val items with |t_pi - T| <= 1
  std::optional<double> joint_rouge2;
  std::vector<std::pair<Stage, double>> stage_seconds;  ///< wall time per stage (not written to report.tsv)
};
/// gen (when [synth] is present) -> configured stages -> infer on the
/// validation split -> report.tsv, all under `out`.
PipelineReport run_pipeline(const RunConfig& cfg, const fs::path& out);

/// Full command-line entry point. Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace s2t::app
