// SPDX-License-Identifier: Apache-2.0
#include "s2t/app/commands.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>

#include "json.hpp"

#include "s2t/analysis/cca.hpp"
#include "s2t/corpus/manifest.hpp"
#include "s2t/error.hpp"
#include "s2t/log.hpp"
#include "s2t/numerics/cmtf.hpp"
#include "s2t/texteval/extractive.hpp"
#include "s2t/texteval/rouge.hpp"

#ifndef S2T_VERSION
#define S2T_VERSION "0.0.0"
#endif

namespace s2t::app {
namespace {

std::string fmt6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void print_stat(std::ostream& out, const std::string& label, const std::vector<double>& values) {
  if (!label.empty()) out << label << ' ';
  if (values.size() == 1) {
    out << fmt6(values[0]) << '\n';
  } else {
    const MeanCi m = mean_ci(values);
    out << fmt6(m.mean) << " ± " << fmt6(m.half_width) << '\n';
  }
}

// Keeps feature/embedding paths valid when a manifest moves to another directory.
std::vector<ManifestRecord> rebase(std::vector<ManifestRecord> records, const fs::path& from, const fs::path& to) {
  const fs::path a = fs::absolute(from).lexically_normal(), b = fs::absolute(to).lexically_normal();
  if (a == b) return records;
  auto move = [&](std::optional<std::string>& p) {
    if (p && !fs::path(*p).is_absolute()) p = (a / *p).lexically_normal().lexically_relative(b).generic_string();
  };
  for (auto& r : records) {
    move(r.feature_path);
    move(r.embedding_path);
  }
  return records;
}

void write_generation(const fs::path& out, const GenerationResult& g) {
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  cmtf::write(out, g.reduced);
  auto side = open_out(fs::path(out.string() + ".eos.tsv"));
  side << "t_pi\t" << g.cut << "\ntruncation_miss\t" << (g.truncation_miss ? 1 : 0) << "\n";
  for (std::size_t t = 0; t < g.eos_probs.size(); ++t) side << t + 1 << '\t' << fmt_full(g.eos_probs[t]) << '\n';
}

fs::path data_path(const RunConfig& cfg, const std::optional<fs::path>& override_path, const std::string& value,
                   const char* key) {
  if (override_path) return *override_path;
  if (value.empty()) throw ConfigError(std::string("no ") + key + " manifest: set [data] " + key + " or pass --" + key);
  return cfg.resolve(value);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void write_run_metadata(const fs::path& path, const std::string& command, const std::string& hash,
                        std::uint64_t seed) {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["config_hash"] = hash;
  j["seed"] = seed;
  j["versions"] = {{"s2tsum", S2T_VERSION},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"unicode", unicode_library_version()},
                   {"compiler", __VERSION__}};
  j["created"] = utc_now();
  open_out(path) << j.dump(2) << '\n';
}

void prep_filter(const fs::path& manifest, const fs::path& hyps, double threshold, const fs::path& out,
                 std::ostream& log) {
  const auto records = read_manifest(manifest);
  const FilterResult r = filter_by_wer(records, read_hypotheses(hyps), threshold);
  write_manifest(out, rebase(r.kept, manifest.parent_path(), out.parent_path()));
  auto report = open_out(fs::path(out.string() + ".wer.tsv"));
  report << "id\twer\tkept\n";
  for (const auto& row : r.report) report << row.id << '\t' << fmt6(row.wer) << '\t' << (row.kept ? 1 : 0) << '\n';
  log << "kept " << r.kept.size() << " of " << records.size() << " records (WER <= " << fmt6(threshold) << ")\n";
}

void prep_split(const fs::path& manifest, const std::vector<double>& ratios, std::uint64_t seed,
                const fs::path& out_dir, std::ostream& log) {
  if (ratios.size() != 3) throw ConfigError("--ratios: expected three comma-separated values");
  const SplitSpec spec{ratios[0], ratios[1], ratios[2], seed};
  const Splits s = split(read_manifest(manifest), spec);
  const std::string stem = manifest.stem().string();
  fs::create_directories(out_dir);
  const std::pair<const char*, const std::vector<ManifestRecord>*> parts[] = {
      {"train", &s.train}, {"dev", &s.dev}, {"test", &s.test}};
  for (const auto& [name, recs] : parts) {
    write_manifest(out_dir / (stem + "." + name + ".jsonl"), rebase(*recs, manifest.parent_path(), out_dir));
    log << name << ' ' << recs->size() << '\n';
  }
}

void synth_gen(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.synth) throw ConfigError("config has no [synth] section");
  write_synth(out, *cfg.synth, synth_generate(*cfg.synth));
  write_run_metadata(out / "run.json", "synth gen", config_hash(cfg), cfg.synth->seed);
}

StageResult train_stage(Stage stage, const RunConfig& cfg, const TrainPaths& paths) {
  const auto train = load_examples(data_path(cfg, paths.train, cfg.data.train, "train"));
  const auto val = load_examples(data_path(cfg, paths.val, cfg.data.val, "val"));
  Checkpoint init;
  if (paths.init) {
    init = load_checkpoint(*paths.init);
  } else {
    init.config = require_adapter(cfg);
    init.adapter = init_params(init.config, cfg.seed);
  }
  const StageResult r = run_stage(cfg.stage(stage), init, train, val);
  save_checkpoint(paths.out, r.best,
                  {{"best_step", std::to_string(r.best_step)},
                   {"best_val", fmt_full(r.best_val)},
                   {"initial_val", fmt_full(r.initial_val)}});
  auto m = open_out(paths.out / "metrics.tsv");
  m << "step\tlambda\tloss\tval\n";
  for (const auto& row : r.log)
    m << row.step << '\t' << fmt_full(row.lambda) << '\t' << fmt_full(row.loss) << '\t'
      << (std::isnan(row.val_loss) ? std::string("NA") : fmt_full(row.val_loss)) << '\n';
  write_run_metadata(paths.out / "run.json", "train " + stage_name(stage), config_hash(cfg), cfg.stage(stage).seed);
  if (r.diverged) throw NumericError(r.message + " (last good checkpoint written to " + paths.out.string() + ")");
  return r;
}

GenerationResult infer(const fs::path& features, const fs::path& params, std::optional<double> pi,
                       std::optional<std::size_t> t_max, const fs::path& out) {
  Checkpoint ck = load_checkpoint(params);
  if (!ck.feature_norm) throw DataError("checkpoint " + params.string() + " has no normalization statistics");
  if (pi) ck.config.pi = *pi;
  if (t_max) ck.config.t_max = *t_max;
  ck.config.validate();
  const Tensor x = apply_norm(cmtf::read(features), *ck.feature_norm);
  const GenerationResult g = generate(x, ck.adapter, ck.config, ck.embedding_norm ? &*ck.embedding_norm : nullptr);
  write_generation(out, g);
  return g;
}

MeanCi eval_wer(const fs::path& ref, const fs::path& hyp, std::ostream& out) {
  const auto r = read_lines(ref), h = read_lines(hyp);
  if (r.size() != h.size())
    throw DataError("reference has " + std::to_string(r.size()) + " lines, hypothesis has " + std::to_string(h.size()));
  if (r.empty()) throw DataError("empty reference file");
  std::vector<double> scores;
  for (std::size_t i = 0; i < r.size(); ++i) {
    try {
      scores.push_back(wer(normalize_text(r[i]), normalize_text(h[i])));
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  print_stat(out, "", scores);
  return mean_ci(scores);
}

void eval_rouge(const fs::path& ref, const fs::path& hyp, bool whole_file, std::ostream& out) {
  auto r = read_lines(ref), h = read_lines(hyp);
  auto as_doc = [](const std::vector<std::string>& lines) {
    std::string d;
    for (const auto& l : lines) d += l + "\n";
    return std::vector<std::string>{d};
  };
  if (whole_file) {
    r = as_doc(r);
    h = as_doc(h);
  } else {
    if (r.size() != h.size())
      throw DataError("reference has " + std::to_string(r.size()) + " lines, hypothesis has " +
                      std::to_string(h.size()));
    // One document per line; sentences within a line feed ROUGE-Lsum.
    auto sentences = [](const std::string& line) {
      std::string d;
      for (const auto& s : split_sentences(line)) d += s + "\n";
      return d;
    };
    for (auto& l : r) l = sentences(l);
    for (auto& l : h) l = sentences(l);
  }
  if (r.empty()) throw DataError("empty reference file");
  std::vector<double> r1, r2, rl, rlsum;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const RougeResult s = rouge_all(r[i], h[i]);
    r1.push_back(s.r1.f1);
    r2.push_back(s.r2.f1);
    rl.push_back(s.rl.f1);
    rlsum.push_back(s.rlsum.f1);
  }
  print_stat(out, "rouge1", r1);
  print_stat(out, "rouge2", r2);
  print_stat(out, "rougeL", rl);
  print_stat(out, "rougeLsum", rlsum);
}

double eval_pwcca(const fs::path& x, const fs::path& y, std::ostream& out) {
  const double s = pwcca(to_rep_matrix(cmtf::read(x)), to_rep_matrix(cmtf::read(y)));
  out << fmt6(s) << '\n';
  return s;
}

void baseline_extractive(const fs::path& manifest, const std::string& field, const ExtractiveConfig& cfg,
                         const fs::path& out, const std::optional<fs::path>& refs_out) {
  cfg.validate();
  if (field != "transcript" && field != "article_body")
    throw ConfigError("--field: expected transcript or article_body, got '" + field + "'");
  const auto records = read_manifest(manifest);
  auto o = open_out(out);
  std::optional<std::ofstream> refs;
  if (refs_out) refs = open_out(*refs_out);
  auto one_line = [](std::string s) {
    for (char& c : s)
      if (c == '\n' || c == '\r') c = ' ';
    return s;
  };
  for (const auto& r : records) {
    const auto sentences = split_sentences(field == "transcript" ? r.transcript : r.article_body);
    std::string summary;
    if (!sentences.empty()) summary = extractive_summary(sentences, term_frequency_embeddings(sentences), cfg);
    o << one_line(summary) << '\n';
    if (refs) *refs << one_line(r.summary) << '\n';
  }
}

PipelineReport run_pipeline(const RunConfig& cfg, const fs::path& out) {
  const AdapterConfig& acfg = require_adapter(cfg);
  fs::create_directories(out);
  fs::path train_path, val_path;
  if (cfg.synth) {
    if (cfg.synth->d_in != acfg.d_in || cfg.synth->d_txt != acfg.d_txt)
      throw ConfigError("[synth] d_in/d_txt must match [adapter]");
    synth_gen(cfg, out / "data");
    train_path = out / "data" / "train.jsonl";
    val_path = out / "data" / "val.jsonl";
  } else {
    train_path = data_path(cfg, std::nullopt, cfg.data.train, "train");
    val_path = data_path(cfg, std::nullopt, cfg.data.val, "val");
  }
  const auto train = load_examples(train_path);
  const auto val = load_examples(val_path);

  PipelineReport rep;
  {
    Checkpoint init{acfg, init_params(acfg, cfg.seed), {}, {}, {}, ""};
    std::vector<Tensor> xs, ys;
    for (const auto& e : train) xs.push_back(e.features), ys.push_back(e.target);
    init.feature_norm = compute_norm_stats(xs);
    init.embedding_norm = compute_norm_stats(ys);
    rep.val_mse_init = teacher_forced_mse(init, val);
  }

  std::optional<fs::path> prev;
  for (Stage s : cfg.pipeline) {
    const fs::path dir = out / (s == Stage::Joint ? "joint" : "stage" + stage_name(s));
    logging::info("run: stage " + stage_name(s) + " -> " + dir.string());
    const auto t0 = std::chrono::steady_clock::now();
    const StageResult r = train_stage(s, cfg, {prev, train_path, val_path, dir});
    rep.stage_seconds.emplace_back(s, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    if (s == Stage::Joint) rep.joint_rouge2 = r.best_val;
    prev = dir;
  }
  if (!prev) throw ConfigError("[run] stages is empty");
  const Checkpoint final_ck = load_checkpoint(*prev);
  rep.val_mse_final = teacher_forced_mse(final_ck, val);

  std::size_t hits = 0;
  for (const auto& e : val) {
    const GenerationResult g =
        generate(apply_norm(e.features, *final_ck.feature_norm), final_ck.adapter, final_ck.config,
                 &*final_ck.embedding_norm);
    write_generation(out / "infer" / (e.id + ".cmtf"), g);
    const auto T = static_cast<long>(e.target.rows()), t = static_cast<long>(g.cut);
    if (std::abs(t - T) <= 1) ++hits;
  }
  rep.eos_within_one = static_cast<double>(hits) / static_cast<double>(val.size());

  auto o = open_out(out / "report.tsv");
  o << "val_mse_init\t" << fmt6(rep.val_mse_init) << "\nval_mse_final\t" << fmt6(rep.val_mse_final)
    << "\nval_mse_reduction\t" << fmt6(1.0 - rep.val_mse_final / rep.val_mse_init) << "\neos_within_one\t"
    << fmt6(rep.eos_within_one) << "\n";
  if (rep.joint_rouge2) o << "joint_dev_rouge2\t" << fmt6(*rep.joint_rouge2) << "\n";
  write_run_metadata(out / "run.json", "run", config_hash(cfg), cfg.seed);
  return rep;
}

}  // namespace s2t::app
