#pragma once

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitq/experiment.hpp"
#include "splitq/format.hpp"

namespace splitq {

// Experiment config file: line-based `key = value` entries under
// `[section]` headers. Reserved sections `environment` and `experiment`;
// every other section defines one agent and must carry an `agent =` key.
// Unknown keys are errors. `#` starts a full-line comment.

class ConfigError : public std::runtime_error {
 public:
  enum class Kind { missing_file, syntax, unknown_key, out_of_range, missing_key, duplicate };

  ConfigError(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

namespace detail_cfg {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
      return false;
  return true;
}

struct RawSection {
  std::string name;
  std::size_t line = 0;
  std::map<std::string, std::string> values;
  std::set<std::string> consumed;
};

inline std::vector<RawSection> tokenize(const std::string& text) {
  std::vector<RawSection> sections;
  std::set<std::string> seen_names;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ConfigError(ConfigError::Kind::syntax,
                          "line " + std::to_string(line_no) + ": unterminated section header");
      const std::string name = trim(t.substr(1, t.size() - 2));
      if (!valid_name(name))
        throw ConfigError(ConfigError::Kind::syntax,
                          "line " + std::to_string(line_no) + ": invalid section name '" + name +
                              "'");
      if (!seen_names.insert(name).second)
        throw ConfigError(ConfigError::Kind::duplicate,
                          "line " + std::to_string(line_no) + ": duplicate section '" + name + "'");
      sections.push_back(RawSection{name, line_no, {}, {}});
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(ConfigError::Kind::syntax,
                        "line " + std::to_string(line_no) + ": expected 'key = value', got '" + t +
                            "'");
    if (sections.empty())
      throw ConfigError(ConfigError::Kind::syntax,
                        "line " + std::to_string(line_no) + ": entry before any [section]");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(ConfigError::Kind::syntax,
                        "line " + std::to_string(line_no) + ": empty key or value");
    if (!sections.back().values.emplace(key, value).second)
      throw ConfigError(ConfigError::Kind::duplicate,
                        "line " + std::to_string(line_no) + ": duplicate key '" + key +
                            "' in section [" + sections.back().name + "]");
  }
  return sections;
}

class SectionView {
 public:
  explicit SectionView(RawSection& raw) : raw_(raw) {}

  bool has(const std::string& key) const { return raw_.values.count(key) > 0; }

  std::string text(const std::string& key, const std::string& fallback) {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    raw_.consumed.insert(key);
    return it->second;
  }

  double real(const std::string& key, double fallback, double lo, double hi, bool lo_open = false) {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    raw_.consumed.insert(key);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(it->second, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != it->second.size())
      throw ConfigError(ConfigError::Kind::syntax,
                        "[" + raw_.name + "] " + key + ": '" + it->second + "' is not a number");
    if (v < lo || v > hi || (lo_open && v == lo))
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw_.name + "] " + key + " = " + it->second + " outside " +
                            (lo_open ? "(" : "[") + format_real17(lo) + ", " + format_real17(hi) +
                            "]");
    return v;
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback, std::uint64_t lo,
                        std::uint64_t hi) {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    raw_.consumed.insert(key);
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(it->second, &pos);
    } catch (const std::exception&) {
      pos = std::string::npos;
    }
    if (pos != it->second.size() || it->second[0] == '-')
      throw ConfigError(ConfigError::Kind::syntax,
                        "[" + raw_.name + "] " + key + ": '" + it->second +
                            "' is not a non-negative integer");
    if (v < lo || v > hi)
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw_.name + "] " + key + " = " + it->second + " outside [" +
                            std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
  }

  bool boolean(const std::string& key, bool fallback) {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    raw_.consumed.insert(key);
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    throw ConfigError(ConfigError::Kind::syntax,
                      "[" + raw_.name + "] " + key + ": expected true or false, got '" +
                          it->second + "'");
  }

  // epsilon_off_step: a step index or the word "never".
  std::uint64_t step_or_never(const std::string& key, std::uint64_t fallback) {
    auto it = raw_.values.find(key);
    if (it == raw_.values.end()) return fallback;
    if (it->second == "never") {
      raw_.consumed.insert(key);
      return kNeverStep;
    }
    return integer(key, fallback, 0, kNeverStep - 1);
  }

  void finish() const {
    for (const auto& [key, value] : raw_.values)
      if (!raw_.consumed.count(key))
        throw ConfigError(ConfigError::Kind::unknown_key,
                          "unknown key '" + key + "' in section [" + raw_.name + "]");
  }

 private:
  RawSection& raw_;
};

inline AgentKind parse_agent_kind(const std::string& section, const std::string& text) {
  if (text == "q_learning") return AgentKind::q_learning;
  if (text == "split_q") return AgentKind::split_q;
  if (text == "uncertain_split_q") return AgentKind::uncertain_split_q;
  throw ConfigError(ConfigError::Kind::out_of_range,
                    "[" + section + "] agent: '" + text +
                        "' is not one of q_learning | split_q | uncertain_split_q");
}

inline SamplerMode parse_sampler_mode(const std::string& section, const std::string& text) {
  if (text == "paper_rejection") return SamplerMode::paper_rejection;
  if (text == "exact_dirichlet") return SamplerMode::exact_dirichlet;
  throw ConfigError(ConfigError::Kind::out_of_range,
                    "[" + section + "] sampler: '" + text +
                        "' is not one of paper_rejection | exact_dirichlet");
}

}  // namespace detail_cfg

inline ExperimentConfig parse_config_text(const std::string& text) {
  using detail_cfg::SectionView;
  std::vector<detail_cfg::RawSection> sections = detail_cfg::tokenize(text);

  ExperimentConfig cfg;
  bool saw_environment = false, saw_experiment = false;

  // environment first: agent reward-bound defaults depend on it.
  for (auto& raw : sections) {
    if (raw.name != "environment") continue;
    saw_environment = true;
    SectionView view(raw);
    cfg.env.m = static_cast<std::uint32_t>(view.integer("m", 20, 1, 1u << 20));
    cfg.env.n = static_cast<std::uint32_t>(view.integer("n", 10, 2, 1u << 20));
    cfg.env.k = static_cast<std::uint32_t>(view.integer("k", 2, 1, 1u << 20));
    cfg.env.seed = view.integer("seed", 1, 0, kNeverStep);
    cfg.env.reward_low = view.real("reward_low", 0.0, -1e18, 1e18);
    cfg.env.reward_high = view.real("reward_high", 1.0, -1e18, 1e18);
    view.finish();
    if (cfg.env.reward_low > cfg.env.reward_high)
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[environment] reward_low must be <= reward_high");
  }

  for (auto& raw : sections) {
    if (raw.name == "environment") continue;
    SectionView view(raw);
    if (raw.name == "experiment") {
      saw_experiment = true;
      cfg.steps = view.integer("steps", 1000, 1, kNeverStep - 1);
      cfg.trials = view.integer("trials", 100, 1, kNeverStep - 1);
      cfg.master_seed = view.integer("master_seed", 1, 0, kNeverStep);
      cfg.smoothing_window = view.integer("smoothing_window", 100, 1, kNeverStep - 1);
      cfg.output_path = view.text("output_path", "out");
      view.finish();
      continue;
    }
    // any other section is an agent
    AgentSpec spec;
    spec.name = raw.name;
    if (!view.has("agent"))
      throw ConfigError(ConfigError::Kind::missing_key,
                        "agent section [" + raw.name + "] is missing the 'agent' key");
    spec.kind = detail_cfg::parse_agent_kind(raw.name, view.text("agent", ""));
    AgentConfig& a = spec.config;
    a.alpha = view.real("alpha", 0.1, 0.0, 1.0, /*lo_open=*/true);
    a.gamma = view.real("gamma", 0.9, 0.0, 1.0);
    if (a.gamma >= 1.0)
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw.name + "] gamma must be < 1");
    a.epsilon = view.real("epsilon", 0.1, 0.0, 1.0);
    a.epsilon_off_step = view.step_or_never("epsilon_off_step", kNeverStep);
    a.r_max = view.real("r_max", cfg.env.reward_high, -1e18, 1e18);
    a.r_min = view.real("r_min", cfg.env.reward_low, -1e18, 1e18);
    if (a.r_min > a.r_max)
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw.name + "] r_min must be <= r_max");
    a.sigma_init = view.real("sigma_init", 0.5, 0.0, 1e18);
    a.ewma_beta = view.real("ewma_beta", a.alpha, 0.0, 1.0, /*lo_open=*/true);
    a.sampler_mode = detail_cfg::parse_sampler_mode(raw.name, view.text("sampler", "paper_rejection"));
    a.unknown_enabled = view.boolean("unknown_enabled", true);
    const std::string stats = view.text("stats_mode", "ewma");
    if (stats == "ewma") a.stats_mode = StatMode::ewma;
    else if (stats == "cumulative") a.stats_mode = StatMode::cumulative;
    else
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw.name + "] stats_mode: '" + stats +
                            "' is not one of ewma | cumulative");
    const std::string decay = view.text("alpha_decay", "constant");
    if (decay == "constant") a.alpha_decay = AlphaDecay::constant;
    else if (decay == "inverse_count") a.alpha_decay = AlphaDecay::inverse_count;
    else
      throw ConfigError(ConfigError::Kind::out_of_range,
                        "[" + raw.name + "] alpha_decay: '" + decay +
                            "' is not one of constant | inverse_count");
    view.finish();
    cfg.agents.push_back(std::move(spec));
  }

  (void)saw_environment;
  (void)saw_experiment;
  return cfg;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(ConfigError::Kind::missing_file, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

// Canonical text of a fully resolved config: every key explicit, reals at
// 17 significant digits. Re-parsing it reproduces the config exactly.
inline std::string write_resolved_config(const ExperimentConfig& cfg) {
  std::string out;
  out += "[environment]\n";
  out += "m = " + std::to_string(cfg.env.m) + "\n";
  out += "n = " + std::to_string(cfg.env.n) + "\n";
  out += "k = " + std::to_string(cfg.env.k) + "\n";
  out += "seed = " + std::to_string(cfg.env.seed) + "\n";
  out += "reward_low = " + format_real17(cfg.env.reward_low) + "\n";
  out += "reward_high = " + format_real17(cfg.env.reward_high) + "\n";
  for (const AgentSpec& spec : cfg.agents) {
    out += "\n[" + spec.name + "]\n";
    const AgentConfig& a = spec.config;
    switch (spec.kind) {
      case AgentKind::q_learning: out += "agent = q_learning\n"; break;
      case AgentKind::split_q: out += "agent = split_q\n"; break;
      case AgentKind::uncertain_split_q: out += "agent = uncertain_split_q\n"; break;
    }
    out += "alpha = " + format_real17(a.alpha) + "\n";
    out += "gamma = " + format_real17(a.gamma) + "\n";
    out += "epsilon = " + format_real17(a.epsilon) + "\n";
    out += std::string("epsilon_off_step = ") +
           (a.epsilon_off_step == kNeverStep ? "never" : std::to_string(a.epsilon_off_step)) + "\n";
    out += "r_max = " + format_real17(a.r_max) + "\n";
    out += "r_min = " + format_real17(a.r_min) + "\n";
    out += "sigma_init = " + format_real17(a.sigma_init) + "\n";
    out += "ewma_beta = " + format_real17(a.ewma_beta) + "\n";
    out += std::string("sampler = ") +
           (a.sampler_mode == SamplerMode::paper_rejection ? "paper_rejection" : "exact_dirichlet") +
           "\n";
    out += std::string("unknown_enabled = ") + (a.unknown_enabled ? "true" : "false") + "\n";
    out += std::string("stats_mode = ") +
           (a.stats_mode == StatMode::ewma ? "ewma" : "cumulative") + "\n";
    out += std::string("alpha_decay = ") +
           (a.alpha_decay == AlphaDecay::constant ? "constant" : "inverse_count") + "\n";
  }
  out += "\n[experiment]\n";
  out += "steps = " + std::to_string(cfg.steps) + "\n";
  out += "trials = " + std::to_string(cfg.trials) + "\n";
  out += "master_seed = " + std::to_string(cfg.master_seed) + "\n";
  out += "smoothing_window = " + std::to_string(cfg.smoothing_window) + "\n";
  out += "output_path = " + cfg.output_path + "\n";
  return out;
}

}  // namespace splitq
