// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "s2t/corpus/manifest.hpp"
#include "s2t/training/checkpoint.hpp"
#include "s2t/training/optimizer.hpp"
#include "s2t/training/schedule.hpp"

namespace s2t {

enum class Stage { One = 1, Two = 2, Three = 3, Joint = 4 };

std::string stage_name(Stage s);  ///< "1", "2", "3", "joint"
/// Accepts 1|2|3|joint and stage1|stage2|stage3; ConfigError otherwise.
Stage parse_stage(const std::string& s);

struct StageConfig {
  Stage stage = Stage::One;
  std::string train_manifest;
  std::string val_manifest;
  MaskConfig mask;          ///< stage 1 only
  ScheduleParams schedule;  ///< defaults per stage, see default_schedule
  AdamConfig adam;
  std::size_t batch_size = 8;
  std::size_t steps = 1000;
  std::size_t eval_every = 100;
  double pos_weight = 0.0;        ///< 0 selects T/4 per sequence
  std::set<std::string> frozen;   ///< extra parameter names to hold fixed
  std::uint64_t seed = 0;
  // Joint stage.
  std::size_t text_hidden = 32;
  double ce_weight = 1.0;
  double bce_weight = 1.0;
  std::size_t max_summary_len = 64;

  void validate() const;
};

ScheduleParams default_schedule(Stage s);

/// Parameters a stage may change; everything else is frozen. Stage 3 trains
/// only the EOS head.
std::set<std::string> frozen_adapter_names(const StageConfig& cfg);

struct MetricRow {
  std::size_t step = 0;
  double lambda = 0.0;
  double loss = 0.0;
  double val_loss = 0.0;  ///< NaN on steps without validation
};

struct StageResult {
  Checkpoint best;                ///< best validation checkpoint
  Checkpoint last;                ///< parameters after the final completed step
  std::vector<MetricRow> log;
  double initial_val = 0.0;       ///< validation objective before the first update
  double best_val = 0.0;
  std::size_t best_step = 0;      ///< 0 = initial parameters
  bool diverged = false;
  std::string message;
};

/// Validation objectives. Stages 1-2: teacher-forced MSE (lower is better).
/// Stage 3: free-running BCE (lower is better). Joint: dev ROUGE-2 F1 of
/// greedy summaries from truncated generations (higher is better).
double validation_objective(const StageConfig& cfg, const Checkpoint& ck, const std::vector<Example>& val);

/// Teacher-forced MSE in normalized space, averaged over examples.
double teacher_forced_mse(const Checkpoint& ck, const std::vector<Example>& data);

/// Mean per-token cross-entropy of the text decoder reading the adapter's
/// gold-length outputs.
double text_decoder_dev_loss(const Checkpoint& ck, const std::vector<Example>& data);

/// Trains one stage from `init`. Examples hold raw (unnormalized) features
/// and embeddings; statistics are computed on `train` when `init` has none.
/// Throws ConfigError when the stage ordering is violated. A non-finite loss
/// stops training and returns the best checkpoint so far with diverged=true.
StageResult run_stage(const StageConfig& cfg, const Checkpoint& init, const std::vector<Example>& train,
                      const std::vector<Example>& val);

/// Per-example objective, exposed for gradient checks. `lambda` is the
/// teacher-forcing ratio; `mask_seed` drives stage-1 masking.
Var stage_example_loss(const StageConfig& cfg, const AdapterVars& p, const TextDecoderVars* text,
                       const Checkpoint& ck, const Example& normalized, double lambda, std::uint64_t mask_seed);

/// Returns a copy of the examples in normalized space.
std::vector<Example> normalize_examples(const std::vector<Example>& raw, const Checkpoint& ck);

}  // namespace s2t
