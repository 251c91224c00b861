// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <sstream>

#include "CLI11.hpp"
#include "s2t/app/commands.hpp"
#include "s2t/error.hpp"

namespace s2t::app {
namespace {

std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError("--ratios: cannot parse '" + item + "'");
    }
  }
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Speech-to-text summarization adapter toolkit", "s2tsum"};
  app.require_subcommand(1);
  std::string command;
  std::function<void()> action;

  // prep
  auto* prep = app.add_subcommand("prep", "Corpus filtering and splitting");
  prep->require_subcommand(1);
  std::string manifest, hyp_path, out_path, ratios = "0.8,0.1,0.1";
  double threshold = 0.45;
  std::uint64_t seed = 0;
  auto* filter = prep->add_subcommand("filter", "Drop records whose ASR WER exceeds a threshold");
  filter->add_option("--manifest", manifest, "input manifest (JSONL)")->required();
  filter->add_option("--hyp", hyp_path, "ASR hypotheses, one 'id<TAB>text' per line")->required();
  filter->add_option("--threshold", threshold, "keep records with WER <= threshold")->capture_default_str();
  filter->add_option("--out", out_path, "output manifest")->required();
  filter->callback([&] {
    command = "prep filter";
    action = [&] { prep_filter(manifest, hyp_path, threshold, out_path, out); };
  });
  auto* split_cmd = prep->add_subcommand("split", "Seeded train/dev/test split");
  split_cmd->add_option("--manifest", manifest, "input manifest (JSONL)")->required();
  split_cmd->add_option("--ratios", ratios, "train,dev,test ratios")->capture_default_str();
  split_cmd->add_option("--seed", seed, "shuffle seed")->capture_default_str();
  split_cmd->add_option("--out", out_path, "output directory (default: next to the manifest)");
  split_cmd->callback([&] {
    command = "prep split";
    action = [&] {
      const fs::path dir = out_path.empty() ? fs::path(manifest).parent_path() : fs::path(out_path);
      prep_split(manifest, parse_ratios(ratios), seed, dir.empty() ? fs::path(".") : dir, out);
    };
  });

  // synth
  auto* synth = app.add_subcommand("synth", "Synthetic task");
  synth->require_subcommand(1);
  std::string config_path;
  auto* gen = synth->add_subcommand("gen", "Generate the synthetic dataset");
  gen->add_option("--config", config_path, "config file with a [synth] section")->required();
  gen->add_option("--out", out_path, "output directory")->required();
  gen->callback([&] {
    command = "synth gen";
    action = [&] { synth_gen(parse_config(config_path), out_path); };
  });

  // train
  std::string stage_id, init_path, train_path, val_path;
  auto* train = app.add_subcommand("train", "Run one training stage");
  train->add_option("stage", stage_id, "stage1, stage2, stage3 or joint")->required();
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--out", out_path, "checkpoint directory to write")->required();
  train->add_option("--init", init_path, "checkpoint to start from (required after stage 1)");
  train->add_option("--train", train_path, "training manifest (overrides [data] train)");
  train->add_option("--val", val_path, "validation manifest (overrides [data] val)");
  train->callback([&] {
    command = "train";
    action = [&] {
      const Stage s = parse_stage(stage_id);
      const RunConfig cfg = parse_config(config_path);
      TrainPaths p;
      if (!init_path.empty()) p.init = init_path;
      if (!train_path.empty()) p.train = train_path;
      if (!val_path.empty()) p.val = val_path;
      p.out = out_path;
      const StageResult r = train_stage(s, cfg, p);
      out << "stage " << stage_name(s) << ": best validation " << r.best_val << " at step " << r.best_step
          << " (initial " << r.initial_val << ")\n";
    };
  });

  // infer
  std::string features_path, params_path;
  double pi = -1.0;
  std::size_t t_max = 0;
  auto* inf = app.add_subcommand("infer", "Generate embeddings for one feature file");
  inf->add_option("--features", features_path, "feature matrix (CMTF)")->required();
  inf->add_option("--params", params_path, "checkpoint directory")->required();
  inf->add_option("--pi", pi, "EOS threshold (default: checkpoint value)");
  inf->add_option("--tmax", t_max, "maximum generated length (default: checkpoint value)");
  inf->add_option("--out", out_path, "output embeddings (CMTF); a .eos.tsv sidecar is written next to it")
      ->required();
  inf->callback([&] {
    command = "infer";
    action = [&] {
      const GenerationResult g =
          infer(features_path, params_path, pi >= 0.0 ? std::optional<double>(pi) : std::nullopt,
                t_max > 0 ? std::optional<std::size_t>(t_max) : std::nullopt, out_path);
      out << "t_pi " << g.cut << (g.truncation_miss ? " (no probability above pi)" : "") << '\n';
    };
  });

  // eval
  auto* eval = app.add_subcommand("eval", "Metrics");
  eval->require_subcommand(1);
  std::string ref_path, x_path, y_path;
  bool whole_file = false;
  auto* rouge = eval->add_subcommand("rouge", "ROUGE-1/2/L/Lsum F1 over line-aligned documents");
  rouge->add_option("--ref", ref_path, "references")->required();
  rouge->add_option("--hyp", hyp_path, "hypotheses")->required();
  rouge->add_flag("--whole-file", whole_file, "treat each file as one document, one sentence per line");
  rouge->callback([&] {
    command = "eval rouge";
    action = [&] { eval_rouge(ref_path, hyp_path, whole_file, out); };
  });
  auto* wer_cmd = eval->add_subcommand("wer", "Word error rate over line-aligned documents");
  wer_cmd->add_option("--ref", ref_path, "references")->required();
  wer_cmd->add_option("--hyp", hyp_path, "hypotheses")->required();
  wer_cmd->callback([&] {
    command = "eval wer";
    action = [&] { eval_wer(ref_path, hyp_path, out); };
  });
  auto* pw = eval->add_subcommand("pwcca", "Projection-weighted CCA between two representation matrices");
  pw->add_option("--x", x_path, "first matrix (CMTF, samples x dims); weights come from it")->required();
  pw->add_option("--y", y_path, "second matrix (CMTF)")->required();
  pw->callback([&] {
    command = "eval pwcca";
    action = [&] { eval_pwcca(x_path, y_path, out); };
  });

  // baseline
  auto* base = app.add_subcommand("baseline", "Reference systems");
  base->require_subcommand(1);
  std::string field = "transcript", refs_path;
  std::size_t w_bar = 0;
  auto* ext = base->add_subcommand("extractive", "Centroid extractive summaries, one per line");
  ext->add_option("--manifest", manifest, "input manifest (JSONL)")->required();
  ext->add_option("--out", out_path, "summaries, one line per record")->required();
  ext->add_option("--refs", refs_path, "also write reference summaries, line-aligned");
  ext->add_option("--field", field, "transcript or article_body")->capture_default_str();
  ext->add_option("--w-bar", w_bar, "word budget (default 24, or [baseline] w_bar)");
  ext->add_option("--config", config_path, "config file");
  ext->callback([&] {
    command = "baseline extractive";
    action = [&] {
      ExtractiveConfig cfg;
      if (!config_path.empty()) cfg = parse_config(config_path).extractive;
      if (w_bar > 0) cfg.w_bar = w_bar;
      baseline_extractive(manifest, field, cfg, out_path,
                          refs_path.empty() ? std::nullopt : std::optional<fs::path>(refs_path));
    };
  });

  // run
  auto* run = app.add_subcommand("run", "Synthetic end-to-end pipeline: gen, stages, infer, report");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--out", out_path, "run directory")->required();
  run->callback([&] {
    command = "run";
    action = [&] {
      const PipelineReport r = run_pipeline(parse_config(config_path), out_path);
      out << "val_mse_init " << r.val_mse_init << "\nval_mse_final " << r.val_mse_final << "\neos_within_one "
          << r.eos_within_one << '\n';
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "s2tsum: " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Config);
  }

  try {
    action();
    return 0;
  } catch (const Error& e) {
    err << "s2tsum: " << command << ": " << e.what() << '\n';
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    err << "s2tsum: " << command << ": " << e.what() << '\n';
    return static_cast<int>(ErrorKind::Data);
  } catch (const std::exception& e) {
    err << "s2tsum: " << command << ": internal error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace s2t::app
