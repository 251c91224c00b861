// SPDX-License-Identifier: Apache-2.0
#include "s2t/app/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "s2t/error.hpp"
#include "s2t/numerics/tensor_dir.hpp"

namespace s2t::app {
namespace {

const std::vector<std::string> kSections = {"run",    "adapter", "synth",  "data",  "train",
                                            "stage1", "stage2",  "stage3", "joint", "baseline"};

struct Entry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

struct Section {
  std::size_t line = 0;
  std::map<std::string, Entry> keys;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Reader {
 public:
  Reader(const std::string& origin, const std::string& name, Section& sec) : origin_(origin), name_(name), sec_(sec) {}

  template <class T>
  bool opt(const char* key, T& out) {
    auto it = sec_.keys.find(key);
    if (it == sec_.keys.end()) return false;
    it->second.used = true;
    convert(key, it->second, out);
    return true;
  }

  template <class T>
  void req(const char* key, T& out) {
    if (!opt(key, out)) fail(sec_.line, std::string("missing required key '") + key + "'");
  }

  void finish() const {
    for (const auto& [k, e] : sec_.keys)
      if (!e.used) fail(e.line, "unknown key '" + k + "'");
  }

  [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": [" + name_ + "] " + msg);
  }

 private:
  [[noreturn]] void bad(const char* key, const Entry& e, const char* what) const {
    fail(e.line, std::string("key '") + key + "': expected " + what + ", got '" + e.value + "'");
  }

  void convert(const char* key, const Entry& e, std::uint64_t& out) const {
    const char* end = e.value.data() + e.value.size();
    const auto r = std::from_chars(e.value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end) bad(key, e, "a non-negative integer");
  }
  void convert(const char* key, const Entry& e, double& out) const {
    const char* end = e.value.data() + e.value.size();
    const auto r = std::from_chars(e.value.data(), end, out);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(out)) bad(key, e, "a finite number");
  }
  void convert(const char*, const Entry& e, std::string& out) const { out = e.value; }
  void convert(const char*, const Entry& e, std::set<std::string>& out) const {
    const auto items = split_list(e.value);
    out = std::set<std::string>(items.begin(), items.end());
  }
  void convert(const char* key, const Entry& e, std::vector<Stage>& out) const {
    out.clear();
    for (const auto& item : split_list(e.value)) {
      try {
        out.push_back(parse_stage(item));
      } catch (const ConfigError&) {
        bad(key, e, "a list of stages (1, 2, 3, joint)");
      }
    }
    if (out.empty()) bad(key, e, "at least one stage");
  }

  const std::string& origin_;
  std::string name_;
  Section& sec_;
};

std::map<std::string, Section> parse_ini(const std::string& text, const std::string& origin) {
  std::map<std::string, Section> out;
  std::istringstream in(text);
  std::string raw, current;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header '" + line + "'");
      current = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), current) == kSections.end())
        throw ConfigError(where + "unknown section '" + current + "'");
      if (out.contains(current)) throw ConfigError(where + "duplicate section '" + current + "'");
      out[current].line = line_no;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (current.empty()) throw ConfigError(where + "key '" + key + "' outside of a section");
    if (key.empty()) throw ConfigError(where + "empty key");
    if (value.empty()) throw ConfigError(where + "[" + current + "] key '" + key + "': empty value");
    auto& sec = out[current];
    if (sec.keys.contains(key)) throw ConfigError(where + "[" + current + "] duplicate key '" + key + "'");
    sec.keys[key] = {value, line_no, false};
  }
  return out;
}

std::string section_name(Stage s) {
  return s == Stage::Joint ? "joint" : "stage" + stage_name(s);
}

constexpr Stage kStages[] = {Stage::One, Stage::Two, Stage::Three, Stage::Joint};

void read_common(Reader& r, StageConfig& c) {
  r.opt("steps", c.steps);
  r.opt("batch_size", c.batch_size);
  r.opt("eval_every", c.eval_every);
  r.opt("lr", c.adam.lr);
  r.opt("beta1", c.adam.beta1);
  r.opt("beta2", c.adam.beta2);
  r.opt("adam_eps", c.adam.eps);
  r.opt("clip_norm", c.adam.clip_norm);
}

void read_stage(Reader& r, StageConfig& c) {
  read_common(r, c);
  r.opt("seed", c.seed);
  r.opt("frozen", c.frozen);
  if (c.stage == Stage::One) {
    r.opt("p_mask", c.mask.p_mask);
    r.opt("m_len", c.mask.m_len);
    return;
  }
  r.opt("epsilon", c.schedule.epsilon);
  r.opt("k", c.schedule.k);
  r.opt("c", c.schedule.c);
  if (c.stage == Stage::Two) return;
  r.opt("pos_weight", c.pos_weight);
  if (c.stage == Stage::Three) return;
  r.opt("text_hidden", c.text_hidden);
  r.opt("ce_weight", c.ce_weight);
  r.opt("bce_weight", c.bce_weight);
  r.opt("max_summary_len", c.max_summary_len);
}

void write_stage(std::ostream& o, const StageConfig& c) {
  o << "[" << section_name(c.stage) << "]\n";
  o << "steps = " << c.steps << "\nbatch_size = " << c.batch_size << "\neval_every = " << c.eval_every << "\n";
  o << "lr = " << fmt_double(c.adam.lr) << "\nbeta1 = " << fmt_double(c.adam.beta1)
    << "\nbeta2 = " << fmt_double(c.adam.beta2) << "\nadam_eps = " << fmt_double(c.adam.eps)
    << "\nclip_norm = " << fmt_double(c.adam.clip_norm) << "\nseed = " << c.seed << "\n";
  if (!c.frozen.empty()) {
    o << "frozen = ";
    bool first = true;
    for (const auto& f : c.frozen) o << (first ? "" : ",") << f, first = false;
    o << "\n";
  }
  if (c.stage == Stage::One) {
    o << "p_mask = " << fmt_double(c.mask.p_mask) << "\nm_len = " << c.mask.m_len << "\n";
    return;
  }
  o << "epsilon = " << fmt_double(c.schedule.epsilon) << "\nk = " << fmt_double(c.schedule.k)
    << "\nc = " << fmt_double(c.schedule.c) << "\n";
  if (c.stage == Stage::Two) return;
  o << "pos_weight = " << fmt_double(c.pos_weight) << "\n";
  if (c.stage == Stage::Three) return;
  o << "text_hidden = " << c.text_hidden << "\nce_weight = " << fmt_double(c.ce_weight)
    << "\nbce_weight = " << fmt_double(c.bce_weight) << "\nmax_summary_len = " << c.max_summary_len << "\n";
}

template <class F>
void validated(const std::string& origin, const std::string& section, std::size_t line, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    throw ConfigError(origin + ":" + std::to_string(line) + ": [" + section + "] " + e.what());
  }
}

}  // namespace

std::filesystem::path RunConfig::resolve(const std::string& path) const {
  const std::filesystem::path p(path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

RunConfig parse_config(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), file.string(), file.parent_path());
}

RunConfig parse_config_text(const std::string& text, const std::string& origin, const std::filesystem::path& base_dir) {
  auto ini = parse_ini(text, origin);
  RunConfig cfg;
  cfg.base_dir = base_dir;
  Section empty;

  if (auto it = ini.find("run"); it != ini.end()) {
    Reader r(origin, "run", it->second);
    r.opt("seed", cfg.seed);
    r.opt("stages", cfg.pipeline);
    r.finish();
  }
  if (auto it = ini.find("adapter"); it != ini.end()) {
    Reader r(origin, "adapter", it->second);
    AdapterConfig a;
    r.req("d_in", a.d_in);
    r.req("d_h", a.d_h);
    r.req("d_txt", a.d_txt);
    r.opt("conv_kernel", a.conv_kernel);
    r.opt("conv_stride", a.conv_stride);
    r.opt("w", a.eos_window);
    r.opt("t_max", a.t_max);
    r.opt("pi", a.pi);
    r.finish();
    validated(origin, "adapter", it->second.line, [&] { a.validate(); });
    cfg.adapter = a;
  }
  if (auto it = ini.find("synth"); it != ini.end()) {
    Reader r(origin, "synth", it->second);
    SynthConfig s;
    r.opt("d_in", s.d_in);
    r.opt("d_txt", s.d_txt);
    r.opt("l_min", s.l_min);
    r.opt("l_max", s.l_max);
    r.opt("rule", s.rule);
    r.opt("n_train", s.n_train);
    r.opt("n_val", s.n_val);
    r.opt("n_test", s.n_test);
    r.opt("vocab", s.vocab);
    r.opt("smoothing", s.smoothing);
    r.opt("seed", s.seed);
    r.finish();
    validated(origin, "synth", it->second.line, [&] { s.validate(); });
    cfg.synth = s;
  }
  if (auto it = ini.find("data"); it != ini.end()) {
    Reader r(origin, "data", it->second);
    r.opt("train", cfg.data.train);
    r.opt("val", cfg.data.val);
    r.opt("test", cfg.data.test);
    r.finish();
  }
  if (auto it = ini.find("baseline"); it != ini.end()) {
    Reader r(origin, "baseline", it->second);
    r.opt("w_bar", cfg.extractive.w_bar);
    r.finish();
    validated(origin, "baseline", it->second.line, [&] { cfg.extractive.validate(); });
  }

  auto train_it = ini.find("train");
  for (Stage s : kStages) {
    StageConfig c;
    c.stage = s;
    c.schedule = default_schedule(s);
    c.seed = cfg.seed * 16 + static_cast<std::uint64_t>(s);
    if (train_it != ini.end()) {
      Reader r(origin, "train", train_it->second);
      read_common(r, c);
    }
    std::size_t line = train_it != ini.end() ? train_it->second.line : 0;
    if (auto it = ini.find(section_name(s)); it != ini.end()) {
      Reader r(origin, section_name(s), it->second);
      read_stage(r, c);
      r.finish();
      line = it->second.line;
    }
    validated(origin, section_name(s), line, [&] { c.validate(); });
    cfg.stages[s] = c;
  }
  if (train_it != ini.end()) Reader(origin, "train", train_it->second).finish();
  return cfg;
}

std::string serialize_config(const RunConfig& cfg) {
  std::ostringstream o;
  o << "[run]\nseed = " << cfg.seed << "\nstages = ";
  for (std::size_t i = 0; i < cfg.pipeline.size(); ++i) o << (i ? "," : "") << stage_name(cfg.pipeline[i]);
  o << "\n";
  if (cfg.adapter) {
    const auto& a = *cfg.adapter;
    o << "\n[adapter]\nd_in = " << a.d_in << "\nd_h = " << a.d_h << "\nd_txt = " << a.d_txt
      << "\nconv_kernel = " << a.conv_kernel << "\nconv_stride = " << a.conv_stride << "\nw = " << a.eos_window
      << "\nt_max = " << a.t_max << "\npi = " << fmt_double(a.pi) << "\n";
  }
  if (cfg.synth) {
    const auto& s = *cfg.synth;
    o << "\n[synth]\nd_in = " << s.d_in << "\nd_txt = " << s.d_txt << "\nl_min = " << s.l_min
      << "\nl_max = " << s.l_max << "\nrule = " << s.rule << "\nn_train = " << s.n_train << "\nn_val = " << s.n_val
      << "\nn_test = " << s.n_test << "\nvocab = " << s.vocab << "\nsmoothing = " << fmt_double(s.smoothing)
      << "\nseed = " << s.seed << "\n";
  }
  if (!cfg.data.train.empty() || !cfg.data.val.empty() || !cfg.data.test.empty()) {
    o << "\n[data]\n";
    if (!cfg.data.train.empty()) o << "train = " << cfg.data.train << "\n";
    if (!cfg.data.val.empty()) o << "val = " << cfg.data.val << "\n";
    if (!cfg.data.test.empty()) o << "test = " << cfg.data.test << "\n";
  }
  o << "\n[baseline]\nw_bar = " << cfg.extractive.w_bar << "\n";
  for (const auto& [s, c] : cfg.stages) {
    o << "\n";
    write_stage(o, c);
  }
  return o.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) { return serialize_config(a) == serialize_config(b); }

std::string config_hash(const RunConfig& cfg) {
  const std::string text = serialize_config(cfg);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

const AdapterConfig& require_adapter(const RunConfig& cfg) {
  if (!cfg.adapter) throw ConfigError("config has no [adapter] section (d_in, d_h, d_txt are required)");
  return *cfg.adapter;
}

}  // namespace s2t::app
