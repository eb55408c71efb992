#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitq/experiment.hpp"
#include "splitq/format.hpp"

namespace splitq {

// CSV contract: header `step,agent,mean_reward,stderr_reward`, one agent
// block per curve, steps ascending from 0, reals at 9 significant digits,
// LF line endings. Byte-exact for identical inputs.

inline std::string csv_text(const std::vector<RewardCurve>& curves) {
  if (curves.empty()) throw std::invalid_argument("csv_text: no curves");
  std::string out = "step,agent,mean_reward,stderr_reward\n";
  for (const RewardCurve& c : curves) {
    for (std::size_t t = 0; t < c.mean.size(); ++t)
      out += std::to_string(t) + "," + c.agent + "," + format_real9(c.mean[t]) + "," +
             format_real9(c.std_error[t]) + "\n";
  }
  return out;
}

inline std::vector<RewardCurve> parse_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "step,agent,mean_reward,stderr_reward")
    throw std::runtime_error("csv parse error: bad or missing header");
  std::vector<RewardCurve> curves;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fail = [&](const std::string& what) {
      throw std::runtime_error("csv parse error at line " + std::to_string(line_no) + ": " + what);
    };
    std::size_t c1 = line.find(',');
    std::size_t c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
    std::size_t c3 = c2 == std::string::npos ? c2 : line.find(',', c2 + 1);
    if (c3 == std::string::npos) fail("expected 4 fields");
    std::size_t pos = 0;
    std::uint64_t step = 0;
    double mean = 0.0, se = 0.0;
    try {
      step = std::stoull(line.substr(0, c1), &pos);
      if (pos != c1) fail("bad step");
      const std::string mean_s = line.substr(c2 + 1, c3 - c2 - 1);
      mean = std::stod(mean_s, &pos);
      if (pos != mean_s.size()) fail("bad mean_reward");
      const std::string se_s = line.substr(c3 + 1);
      se = std::stod(se_s, &pos);
      if (pos != se_s.size()) fail("bad stderr_reward");
    } catch (const std::invalid_argument&) {
      fail("malformed number");
    } catch (const std::out_of_range&) {
      fail("number out of range");
    }
    const std::string agent = line.substr(c1 + 1, c2 - c1 - 1);
    if (agent.empty()) fail("empty agent name");
    if (curves.empty() || curves.back().agent != agent) {
      for (const RewardCurve& c : curves)
        if (c.agent == agent) fail("agent block '" + agent + "' is not contiguous");
      curves.push_back(RewardCurve{agent, {}, {}, ""});
    }
    RewardCurve& cur = curves.back();
    if (step != cur.mean.size()) fail("steps not consecutive within agent block");
    cur.mean.push_back(mean);
    cur.std_error.push_back(se);
  }
  if (curves.empty()) throw std::runtime_error("csv parse error: no data rows");
  return curves;
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_csv(const std::vector<RewardCurve>& curves, const std::string& path) {
  write_text_file(path, csv_text(curves));
}

inline std::vector<RewardCurve> read_csv(const std::string& path) {
  return parse_csv_text(read_text_file(path));
}

// ---------------------------------------------------------------------------
// SVG rendering of reward curves, one polyline per agent, with optional
// vertical markers where an agent's epsilon schedule switches off.

struct RenderOptions {
  std::uint64_t smoothing_window = 100;
  std::vector<std::pair<std::string, std::uint64_t>> epsilon_off_markers;
};

namespace detail_svg {

inline constexpr int kWidth = 960;
inline constexpr int kHeight = 540;
inline constexpr int kLeft = 70, kRight = 20, kTop = 20, kBottom = 55;

inline const char* color(std::size_t i) {
  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#e377c2"};
  return palette[i % (sizeof(palette) / sizeof(palette[0]))];
}

inline std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace detail_svg

inline std::string render_svg(const std::vector<RewardCurve>& curves, const RenderOptions& opt) {
  using namespace detail_svg;
  if (curves.empty()) throw std::invalid_argument("render_svg: no curves");

  std::vector<RewardCurve> shown;
  shown.reserve(curves.size());
  std::size_t raw_steps = 0;
  for (const RewardCurve& c : curves) {
    raw_steps = std::max(raw_steps, c.mean.size());
    shown.push_back(smooth_curve(c, opt.smoothing_window));
  }

  double ymin = 1e300, ymax = -1e300;
  for (const RewardCurve& c : shown)
    for (double v : c.mean) {
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
  if (ymin > ymax) { ymin = 0.0; ymax = 1.0; }
  double pad = (ymax - ymin) * 0.05;
  if (pad == 0.0) pad = ymax == 0.0 ? 1.0 : std::abs(ymax) * 0.05;
  ymin -= pad;
  ymax += pad;

  const double xmax = raw_steps > 1 ? static_cast<double>(raw_steps - 1) : 1.0;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double step) { return kLeft + step / xmax * plot_w; };
  auto sy = [&](double v) { return kTop + plot_h - (v - ymin) / (ymax - ymin) * plot_h; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " + std::to_string(kWidth) +
         " " + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"" + std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" fill=\"white\"/>\n";
  svg += "<style>.lbl{font-family:sans-serif;font-size:12px;fill:#000}"
         ".axis{stroke:#000;stroke-width:1}.grid{stroke:#ddd;stroke-width:1}</style>\n";

  // grid and ticks
  const int xticks = 8, yticks = 6;
  for (int i = 0; i <= xticks; ++i) {
    const double step = xmax * i / xticks;
    const std::string x = num(sx(step));
    svg += "<line class=\"grid\" x1=\"" + x + "\" y1=\"" + num(kTop) + "\" x2=\"" + x +
           "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
    svg += "<text class=\"lbl\" x=\"" + x + "\" y=\"" + num(kTop + plot_h + 18) +
           "\" text-anchor=\"middle\">" + tick_label(step) + "</text>\n";
  }
  for (int i = 0; i <= yticks; ++i) {
    const double v = ymin + (ymax - ymin) * i / yticks;
    const std::string y = num(sy(v));
    svg += "<line class=\"grid\" x1=\"" + num(kLeft) + "\" y1=\"" + y + "\" x2=\"" +
           num(kLeft + plot_w) + "\" y2=\"" + y + "\"/>\n";
    svg += "<text class=\"lbl\" x=\"" + num(kLeft - 6) + "\" y=\"" + num(sy(v) + 4) +
           "\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
  }
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop + plot_h) + "\" x2=\"" +
         num(kLeft + plot_w) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "<line class=\"axis\" x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" +
         num(kLeft) + "\" y2=\"" + num(kTop + plot_h) + "\"/>\n";
  svg += "<text class=\"lbl\" x=\"" + num(kLeft + plot_w / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">step</text>\n";
  svg += "<text class=\"lbl\" x=\"16\" y=\"" + num(kTop + plot_h / 2) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " + num(kTop + plot_h / 2) +
         ")\">average reward</text>\n";

  // epsilon-off markers
  for (const auto& [agent, off_step] : opt.epsilon_off_markers) {
    if (off_step >= raw_steps) continue;
    std::size_t idx = shown.size();
    for (std::size_t i = 0; i < curves.size(); ++i)
      if (curves[i].agent == agent) { idx = i; break; }
    if (idx == shown.size()) continue;
    const std::string x = num(sx(static_cast<double>(off_step)));
    svg += "<line x1=\"" + x + "\" y1=\"" + num(kTop) + "\" x2=\"" + x + "\" y2=\"" +
           num(kTop + plot_h) + "\" stroke=\"" + color(idx) +
           "\" stroke-width=\"1\" stroke-dasharray=\"5 4\"/>\n";
  }

  // curves (smoothed point i covers raw steps [i*w, i*w+w), plotted at the
  // window start)
  for (std::size_t ci = 0; ci < shown.size(); ++ci) {
    const RewardCurve& c = shown[ci];
    svg += "<polyline fill=\"none\" stroke=\"";
    svg += color(ci);
    svg += "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < c.mean.size(); ++i) {
      const double step = static_cast<double>(i * opt.smoothing_window);
      svg += num(sx(std::min(step, xmax))) + "," + num(sy(c.mean[i])) + " ";
    }
    svg += "\"/>\n";
  }

  // legend
  for (std::size_t ci = 0; ci < shown.size(); ++ci) {
    const double y = kTop + 16 + 18.0 * ci;
    svg += "<line x1=\"" + num(kLeft + plot_w - 150) + "\" y1=\"" + num(y) + "\" x2=\"" +
           num(kLeft + plot_w - 126) + "\" y2=\"" + num(y) + "\" stroke=\"" + color(ci) +
           "\" stroke-width=\"3\"/>\n";
    svg += "<text class=\"lbl\" x=\"" + num(kLeft + plot_w - 120) + "\" y=\"" + num(y + 4) +
           "\" text-anchor=\"start\">" + shown[ci].agent + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

inline void render_svg_file(const std::vector<RewardCurve>& curves, const RenderOptions& opt,
                            const std::string& path) {
  write_text_file(path, render_svg(curves, opt));
}

// Deterministic run diagnostics: provenance digest plus aggregated
// posterior-sampler counters.
inline std::string diagnostics_text(const ExperimentConfig& cfg, const std::string& digest,
                                    const SamplerDiagnostics& diag) {
  std::string out;
  out += "config_digest " + digest + "\n";
  out += "trials " + std::to_string(cfg.trials) + "\n";
  out += "steps " + std::to_string(cfg.steps) + "\n";
  out += "agents " + std::to_string(cfg.agents.size()) + "\n";
  out += "sampler_samples " + std::to_string(diag.samples) + "\n";
  out += "sampler_proposals " + std::to_string(diag.proposals) + "\n";
  out += "sampler_fallbacks " + std::to_string(diag.fallbacks) + "\n";
  return out;
}

}  // namespace splitq
