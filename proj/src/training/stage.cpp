// SPDX-License-Identifier: Apache-2.0
#include "s2t/training/stage.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "s2t/adapter/adapter.hpp"
#include "s2t/error.hpp"
#include "s2t/inference/generate.hpp"
#include "s2t/log.hpp"
#include "s2t/numerics/ops.hpp"
#include "s2t/texteval/rouge.hpp"
#include "s2t/training/losses.hpp"

namespace s2t {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int stage_rank(const std::string& s) {
  if (s.empty()) return 0;
  if (s == "joint") return 4;
  return parse_stage(s) == Stage::Joint ? 4 : static_cast<int>(parse_stage(s));
}

// SplitMix64 finalizer; derives independent per-(step, example) seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

bool higher_is_better(Stage s) { return s == Stage::Joint; }

struct Encoded {
  EncoderStates enc;
};

EncoderStates run_encoder(const AdapterVars& p, const AdapterConfig& cfg, Var x) {
  return encode(p, downsample(p, x, cfg));
}

double free_running_bce(const Checkpoint& ck, const StageConfig& cfg, const std::vector<Example>& data) {
  double total = 0.0;
  for (const auto& ex : data) {
    Tape tape;
    const AdapterVars p = s2t::bind(tape, ck.adapter, {});
    const std::size_t T = ex.target.rows(), w = ck.config.eos_window;
    const DecodeResult dec = decode(p, run_encoder(p, ck.config, tape.constant(ex.features)), T + w, nullptr, 0);
    const double pw = cfg.pos_weight > 0.0 ? cfg.pos_weight : default_pos_weight(T);
    total += eos_bce_loss(concat(eos_probabilities(p, dec, T, w)), T, pw).value()[0];
  }
  return total / static_cast<double>(data.size());
}

double dev_rouge2(const Checkpoint& ck, const StageConfig& cfg, const std::vector<Example>& data) {
  if (!ck.text) throw ConfigError("joint stage: no text decoder");
  double total = 0.0;
  for (const auto& ex : data) {
    const GenerationResult g = generate(ex.features, ck.adapter, ck.config, &*ck.embedding_norm);
    const Tensor red({g.cut, g.normalized.cols()},
                     {g.normalized.data().begin(),
                      g.normalized.data().begin() + static_cast<std::ptrdiff_t>(g.cut * g.normalized.cols())});
    const auto ids = greedy_decode(*ck.text, red, cfg.max_summary_len);
    total += rouge_n(normalize_text(ex.summary), normalize_text(ck.text->vocab.decode(ids)), 2).f1;
  }
  return total / static_cast<double>(data.size());
}

double mean_tf_mse(const Checkpoint& ck, const std::vector<Example>& data) {
  double total = 0.0;
  for (const auto& ex : data) {
    Tape tape;
    const AdapterVars p = s2t::bind(tape, ck.adapter, {});
    const std::size_t T = ex.target.rows();
    const DecodeResult dec = decode(p, run_encoder(p, ck.config, tape.constant(ex.features)), T, &ex.target, T);
    total += mse_loss(dec.ys, ex.target).value()[0];
  }
  return total / static_cast<double>(data.size());
}

double mean_text_ce(const Checkpoint& ck, const std::vector<Example>& data) {
  if (!ck.text) throw ConfigError("no text decoder in checkpoint");
  double total = 0.0;
  for (const auto& ex : data) {
    Tape tape;
    const AdapterVars p = s2t::bind(tape, ck.adapter, {});
    const TextDecoderVars tv = s2t::bind(tape, ck.text->params, false);
    const std::size_t T = ex.target.rows();
    const DecodeResult dec = decode(p, run_encoder(p, ck.config, tape.constant(ex.features)), T, nullptr, 0);
    total += text_decoder_loss(tv, dec.ys, ck.text->vocab.encode(ex.summary)).value()[0];
  }
  return total / static_cast<double>(data.size());
}

void require_norm(const Checkpoint& ck) {
  if (!ck.feature_norm || !ck.embedding_norm) throw DataError("checkpoint has no normalization statistics");
}

}  // namespace

std::string stage_name(Stage s) {
  switch (s) {
    case Stage::One: return "1";
    case Stage::Two: return "2";
    case Stage::Three: return "3";
    case Stage::Joint: return "joint";
  }
  return "?";
}

Stage parse_stage(const std::string& s) {
  if (s == "1" || s == "stage1") return Stage::One;
  if (s == "2" || s == "stage2") return Stage::Two;
  if (s == "3" || s == "stage3") return Stage::Three;
  if (s == "joint") return Stage::Joint;
  throw ConfigError("unknown training stage '" + s + "' (expected 1, 2, 3 or joint)");
}

ScheduleParams default_schedule(Stage s) {
  switch (s) {
    case Stage::One: return ScheduleParams::teacher_forcing();
    case Stage::Two: return ScheduleParams::stage2();
    case Stage::Three: return ScheduleParams::stage3();
    case Stage::Joint: return ScheduleParams::stage2();
  }
  return {};
}

void StageConfig::validate() const {
  mask.validate();
  schedule.validate();
  adam.validate();
  if (batch_size < 1) throw ConfigError("train.batch_size: must be >= 1");
  if (eval_every < 1) throw ConfigError("train.eval_every: must be >= 1");
  if (!(pos_weight >= 0.0)) throw ConfigError("train.pos_weight: must be >= 0");
  if (stage == Stage::Joint && (text_hidden < 1 || max_summary_len < 1)) {
    throw ConfigError("train: text_hidden and max_summary_len must be >= 1");
  }
  if (!(ce_weight >= 0.0 && bce_weight >= 0.0)) throw ConfigError("train: loss weights must be >= 0");
}

std::set<std::string> frozen_adapter_names(const StageConfig& cfg) {
  std::set<std::string> frozen = cfg.frozen;
  if (cfg.stage == Stage::Three) {
    AdapterParams names;
    names.visit([&](const char* n, Tensor&) {
      if (!eos_parameter_names().contains(n)) frozen.insert(n);
    });
  }
  return frozen;
}

std::vector<Example> normalize_examples(const std::vector<Example>& raw, const Checkpoint& ck) {
  require_norm(ck);
  std::vector<Example> out;
  out.reserve(raw.size());
  for (const auto& e : raw)
    out.push_back({e.id, apply_norm(e.features, *ck.feature_norm), apply_norm(e.target, *ck.embedding_norm), e.summary});
  return out;
}

Var stage_example_loss(const StageConfig& cfg, const AdapterVars& p, const TextDecoderVars* text,
                       const Checkpoint& ck, const Example& ex, double lambda, std::uint64_t mask_seed) {
  Tape& tape = p.conv1_w.tape();
  const std::size_t T = ex.target.rows(), w = ck.config.eos_window;
  Var x = tape.constant(ex.features);
  if (cfg.stage == Stage::One && cfg.mask.p_mask > 0.0) {
    rnd::Engine rng(mask_seed);
    const auto mask = sample_mask(ex.features.rows(), cfg.mask, rng);
    x = replace_rows(x, mask, p.mask_embedding);
  }
  const EncoderStates enc = run_encoder(p, ck.config, x);
  switch (cfg.stage) {
    case Stage::One: {
      const DecodeResult dec = decode(p, enc, T, &ex.target, T);
      return mse_loss(dec.ys, ex.target);
    }
    case Stage::Two: {
      const DecodeResult dec = decode(p, enc, T, &ex.target, teacher_steps(lambda, T));
      return mse_loss(dec.ys, ex.target);
    }
    case Stage::Three:
    case Stage::Joint: {
      // Decode past the end so the EOS window at position T is not clipped.
      const DecodeResult dec = decode(p, enc, T + w, &ex.target, teacher_steps(lambda, T));
      const double pw = cfg.pos_weight > 0.0 ? cfg.pos_weight : default_pos_weight(T);
      Var bce = eos_bce_loss(concat(eos_probabilities(p, dec, T, w)), T, pw);
      if (cfg.stage == Stage::Three) return bce;
      if (!text || !ck.text) throw ConfigError("joint stage: no text decoder");
      const std::vector<Var> ys(dec.ys.begin(), dec.ys.begin() + static_cast<std::ptrdiff_t>(T));
      Var ce = text_decoder_loss(*text, ys, ck.text->vocab.encode(ex.summary));
      return add(scale(ce, cfg.ce_weight), scale(bce, cfg.bce_weight));
    }
  }
  throw ConfigError("unknown stage");
}

double teacher_forced_mse(const Checkpoint& ck, const std::vector<Example>& data) {
  return mean_tf_mse(ck, normalize_examples(data, ck));
}

double text_decoder_dev_loss(const Checkpoint& ck, const std::vector<Example>& data) {
  return mean_text_ce(ck, normalize_examples(data, ck));
}

double validation_objective(const StageConfig& cfg, const Checkpoint& ck, const std::vector<Example>& val) {
  const auto norm = normalize_examples(val, ck);
  switch (cfg.stage) {
    case Stage::One:
    case Stage::Two: return mean_tf_mse(ck, norm);
    case Stage::Three: return free_running_bce(ck, cfg, norm);
    case Stage::Joint: return dev_rouge2(ck, cfg, norm);
  }
  return kNaN;
}

StageResult run_stage(const StageConfig& cfg, const Checkpoint& init, const std::vector<Example>& train,
                      const std::vector<Example>& val) {
  cfg.validate();
  init.config.validate();
  if (train.empty() || val.empty()) throw DataError("training needs non-empty train and validation sets");
  const int need = static_cast<int>(cfg.stage) - 1;
  if (stage_rank(init.stage) < need) {
    throw ConfigError("stage " + stage_name(cfg.stage) + " requires a checkpoint from stage " +
                      (need == 3 ? std::string("3") : std::to_string(need)) + ", got " +
                      (init.stage.empty() ? std::string("an untrained initialization") : "stage " + init.stage));
  }

  Checkpoint ck = init;
  check_shapes(ck.adapter, ck.config);
  if (!ck.feature_norm || !ck.embedding_norm) {
    std::vector<Tensor> xs, ys;
    for (const auto& e : train) {
      xs.push_back(e.features);
      ys.push_back(e.target);
    }
    ck.feature_norm = compute_norm_stats(xs);
    ck.embedding_norm = compute_norm_stats(ys);
  }
  const bool joint = cfg.stage == Stage::Joint;
  if (joint && !ck.text) {
    std::vector<std::string> summaries;
    for (const auto& e : train) summaries.push_back(e.summary);
    ck.text = init_text_decoder(Vocab::from_summaries(summaries), ck.config.d_txt, cfg.text_hidden, mix(cfg.seed));
  }
  const auto train_n = normalize_examples(train, ck);
  const auto val_n = normalize_examples(val, ck);
  const std::set<std::string> frozen = frozen_adapter_names(cfg);

  // Trainable tensors in a fixed order.
  std::vector<Tensor*> slots;
  std::vector<std::string> slot_names;
  ck.adapter.visit([&](const char* n, Tensor& t) {
    if (!frozen.contains(n)) slots.push_back(&t), slot_names.push_back(n);
  });
  if (joint) {
    ck.text->params.visit([&](const char* n, Tensor& t) {
      if (!frozen.contains(n)) slots.push_back(&t), slot_names.push_back(n);
    });
  }
  const bool text_trainable = joint && !frozen.contains("textdec.emb");

  auto evaluate = [&](const Checkpoint& c) -> double {
    switch (cfg.stage) {
      case Stage::One:
      case Stage::Two: return mean_tf_mse(c, val_n);
      case Stage::Three: return free_running_bce(c, cfg, val_n);
      case Stage::Joint: return dev_rouge2(c, cfg, val_n);
    }
    return kNaN;
  };
  auto better = [&](double a, double b) { return higher_is_better(cfg.stage) ? a > b : a < b; };

  StageResult res;
  res.initial_val = evaluate(ck);
  res.best_val = res.initial_val;
  res.best = ck;
  res.best.stage = stage_name(cfg.stage);

  Adam adam(cfg.adam);
  rnd::Engine rng(cfg.seed);
  std::vector<std::size_t> order(train_n.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();

  for (std::size_t j = 0; j < cfg.steps; ++j) {
    const double lambda = teacher_forcing_ratio(j, cfg.schedule);
    std::vector<Tensor> grads;
    for (Tensor* t : slots) grads.emplace_back(t->shape());
    double loss_sum = 0.0;
    try {
      for (std::size_t b = 0; b < cfg.batch_size; ++b) {
        if (cursor == order.size()) {
          for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rnd::below(rng, i)]);
          cursor = 0;
        }
        const std::size_t idx = order[cursor++];
        Tape tape;
        const AdapterVars p = s2t::bind(tape, ck.adapter, frozen);
        TextDecoderVars tv;
        if (joint) tv = s2t::bind(tape, ck.text->params, text_trainable);
        Var loss = stage_example_loss(cfg, p, joint ? &tv : nullptr, ck, train_n[idx], lambda,
                                      mix(cfg.seed ^ mix(j * 1000003ULL + b)));
        const double lv = loss.value()[0];
        if (!std::isfinite(lv)) throw NumericError("non-finite loss");
        loss_sum += lv;
        tape.backward(loss);
        std::vector<Var> vars;
        p.visit([&](const char* n, const Var& v) {
          if (!frozen.contains(n)) vars.push_back(v);
        });
        if (joint) {
          tv.visit([&](const char* n, const Var& v) {
            if (!frozen.contains(n)) vars.push_back(v);
          });
        }
        for (std::size_t k = 0; k < vars.size(); ++k) grads[k] += tape.grad(vars[k].id());
      }
      for (const Tensor& g : grads)
        if (!g.all_finite()) throw NumericError("non-finite gradient");
      const double inv = 1.0 / static_cast<double>(cfg.batch_size);
      for (Tensor& g : grads)
        for (double& v : g.data()) v *= inv;
      adam.step(slots, grads);
      for (Tensor* t : slots)
        if (!t->all_finite()) throw NumericError("non-finite parameters after update");
    } catch (const NumericError& e) {
      res.diverged = true;
      res.message = "diverged at step " + std::to_string(j + 1) + ": " + e.what();
      logging::error(res.message);
      break;
    }

    MetricRow row{j + 1, lambda, loss_sum / static_cast<double>(cfg.batch_size), kNaN};
    if ((j + 1) % cfg.eval_every == 0 || j + 1 == cfg.steps) {
      row.val_loss = evaluate(ck);
      if (better(row.val_loss, res.best_val)) {
        res.best_val = row.val_loss;
        res.best_step = j + 1;
        res.best = ck;
        res.best.stage = stage_name(cfg.stage);
      }
      logging::info("stage " + stage_name(cfg.stage) + " step " + std::to_string(j + 1) + " loss " +
                std::to_string(row.loss) + " val " + std::to_string(row.val_loss));
    }
    res.log.push_back(row);
  }
  res.last = ck;
  res.last.stage = stage_name(cfg.stage);
  if (res.diverged) res.last = res.best;
  return res;
}

}  // namespace s2t
