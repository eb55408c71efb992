// splitq command-line front end.
//
//   splitq gen-env --config FILE --out FILE
//   splitq run     --config FILE [--out-dir DIR] [--workers N]
//   splitq plot    --csv FILE --out FILE [--config FILE]
//
// Exit codes: 0 success, 2 usage error, 1 anything else.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "splitq/config_parse.hpp"
#include "splitq/experiment.hpp"
#include "splitq/format.hpp"
#include "splitq/layered_env.hpp"
#include "splitq/mdp_io.hpp"
#include "splitq/report.hpp"

namespace {

constexpr const char* kUsage =
    "usage: splitq <subcommand> [flags]\n"
    "\n"
    "  gen-env --config FILE --out FILE      write the configured layered\n"
    "                                        environment as an mdp-v1 file\n"
    "  run     --config FILE [--out-dir DIR] [--workers N]\n"
    "                                        run the experiment; writes\n"
    "                                        curves.csv, curves.svg,\n"
    "                                        resolved_config.cfg and\n"
    "                                        diagnostics.txt into DIR\n"
    "  plot    --csv FILE --out FILE [--config FILE]\n"
    "                                        re-render the SVG from a CSV;\n"
    "                                        rendering options come from\n"
    "                                        --config, else from a\n"
    "                                        resolved_config.cfg next to\n"
    "                                        the CSV, else defaults\n";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flags of the form --name VALUE; every subcommand declares its set.
std::map<std::string, std::string> parse_flags(const std::vector<std::string>& args,
                                               const std::vector<std::string>& allowed) {
  std::map<std::string, std::string> flags;
  for (std::size_t i = 0; i < args.size(); i += 2) {
    const std::string& name = args[i];
    bool known = false;
    for (const std::string& a : allowed) known = known || a == name;
    if (!known) throw UsageError("unknown flag '" + name + "'");
    if (i + 1 >= args.size()) throw UsageError("flag '" + name + "' needs a value");
    if (!flags.emplace(name, args[i + 1]).second)
      throw UsageError("flag '" + name + "' given twice");
  }
  return flags;
}

std::string require_flag(const std::map<std::string, std::string>& flags, const std::string& name) {
  auto it = flags.find(name);
  if (it == flags.end()) throw UsageError("missing required flag '" + name + "'");
  return it->second;
}

splitq::RenderOptions render_options_for(const splitq::ExperimentConfig& cfg) {
  splitq::RenderOptions opt;
  opt.smoothing_window = cfg.smoothing_window;
  for (const splitq::AgentSpec& spec : cfg.agents) {
    if (spec.kind == splitq::AgentKind::uncertain_split_q) continue;
    if (spec.config.epsilon > 0.0 && spec.config.epsilon_off_step != splitq::kNeverStep &&
        spec.config.epsilon_off_step < cfg.steps)
      opt.epsilon_off_markers.emplace_back(spec.name, spec.config.epsilon_off_step);
  }
  return opt;
}

int cmd_gen_env(const std::map<std::string, std::string>& flags) {
  const splitq::ExperimentConfig cfg = splitq::parse_config_file(require_flag(flags, "--config"));
  const splitq::TabularMdp mdp = splitq::generate_layered(cfg.env);
  splitq::write_mdp_file(mdp, require_flag(flags, "--out"));
  std::cout << "wrote " << flags.at("--out") << " (" << mdp.num_states() << " states)\n";
  return 0;
}

int cmd_run(const std::map<std::string, std::string>& flags) {
  splitq::ExperimentConfig cfg = splitq::parse_config_file(require_flag(flags, "--config"));
  if (auto it = flags.find("--out-dir"); it != flags.end()) cfg.output_path = it->second;
  if (cfg.agents.empty())
    throw std::runtime_error("config has no agent sections; nothing to run");

  unsigned workers = 0;
  if (auto it = flags.find("--workers"); it != flags.end()) {
    try {
      const int v = std::stoi(it->second);
      if (v < 1) throw std::invalid_argument("");
      workers = static_cast<unsigned>(v);
    } catch (const std::exception&) {
      throw UsageError("--workers expects a positive integer, got '" + it->second + "'");
    }
  }

  const std::filesystem::path dir(cfg.output_path);
  std::filesystem::create_directories(dir);

  const std::string resolved = splitq::write_resolved_config(cfg);
  const std::string digest = splitq::hex64(splitq::fnv1a64(resolved));
  splitq::write_text_file((dir / "resolved_config.cfg").string(), resolved);

  splitq::ExperimentResult result = splitq::run_experiment(cfg, workers);
  for (splitq::RewardCurve& c : result.curves) c.config_digest = digest;

  const std::string csv_path = (dir / "curves.csv").string();
  splitq::write_csv(result.curves, csv_path);

  // Render from the re-read CSV so the SVG is a pure function of the CSV
  // bytes; `plot` then reproduces it exactly.
  const std::vector<splitq::RewardCurve> rounded = splitq::read_csv(csv_path);
  splitq::render_svg_file(rounded, render_options_for(cfg), (dir / "curves.svg").string());

  splitq::write_text_file((dir / "diagnostics.txt").string(),
                          splitq::diagnostics_text(cfg, digest, result.sampler));

  std::cout << "ran " << cfg.trials << " trials x " << cfg.agents.size() << " agents x "
            << cfg.steps << " steps\n";
  for (const splitq::RewardCurve& c : result.curves) {
    double late = 0.0;
    const std::size_t tail = std::min<std::size_t>(c.mean.size(), 1000);
    for (std::size_t i = c.mean.size() - tail; i < c.mean.size(); ++i) late += c.mean[i];
    std::cout << "  " << c.agent << ": mean reward over final " << tail << " steps = "
              << splitq::format_real9(late / static_cast<double>(tail)) << "\n";
  }
  if (result.sampler.fallbacks > 0)
    std::cout << "  note: " << result.sampler.fallbacks
              << " posterior draws hit the proposal cap and used the fallback center\n";
  std::cout << "outputs in " << dir.string() << "\n";
  return 0;
}

int cmd_plot(const std::map<std::string, std::string>& flags) {
  const std::string csv_path = require_flag(flags, "--csv");
  const std::vector<splitq::RewardCurve> curves = splitq::read_csv(csv_path);

  splitq::RenderOptions opt;
  std::optional<std::string> config_path;
  if (auto it = flags.find("--config"); it != flags.end()) {
    config_path = it->second;
  } else {
    const std::filesystem::path sibling =
        std::filesystem::path(csv_path).parent_path() / "resolved_config.cfg";
    if (std::filesystem::exists(sibling)) config_path = sibling.string();
  }
  if (config_path) opt = render_options_for(splitq::parse_config_file(*config_path));

  splitq::render_svg_file(curves, opt, require_flag(flags, "--out"));
  std::cout << "wrote " << flags.at("--out") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    if (args.empty()) throw UsageError("no subcommand given");
    const std::string cmd = args[0];
    const std::vector<std::string> rest(args.begin() + 1, args.end());
    if (cmd == "gen-env")
      return cmd_gen_env(parse_flags(rest, {"--config", "--out"}));
    if (cmd == "run")
      return cmd_run(parse_flags(rest, {"--config", "--out-dir", "--workers"}));
    if (cmd == "plot")
      return cmd_plot(parse_flags(rest, {"--csv", "--out", "--config"}));
    if (cmd == "--help" || cmd == "help") {
      std::cout << kUsage;
      return 0;
    }
    throw UsageError("unknown subcommand '" + cmd + "'");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
