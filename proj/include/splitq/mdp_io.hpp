#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "splitq/format.hpp"
#include "splitq/mdp.hpp"

namespace splitq {

// mdp-v1: line-based UTF-8 text serialization of a TabularMdp.
//
//   mdp-v1
//   num_states <N>
//   state <s> actions <A>
//   action <a> outcomes <M>
//   outcome <next_state> <probability> <reward>
//
// Reals carry 17 significant digits, so write/read round-trips bit-exactly.

inline std::string write_mdp_text(const TabularMdp& mdp) {
  std::string out = "mdp-v1\n";
  out += "num_states " + std::to_string(mdp.num_states()) + "\n";
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    out += "state " + std::to_string(s) + " actions " + std::to_string(mdp.num_actions(s)) + "\n";
    for (ActionId a = 0; a < mdp.num_actions(s); ++a) {
      const auto& outs = mdp.outcomes(s, a);
      out += "action " + std::to_string(a) + " outcomes " + std::to_string(outs.size()) + "\n";
      for (const Outcome& o : outs)
        out += "outcome " + std::to_string(o.next_state) + " " + format_real17(o.probability) +
               " " + format_real17(o.reward) + "\n";
    }
  }
  return out;
}

namespace detail {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  // Next non-empty line; returns false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw std::runtime_error("mdp-v1 parse error at line " + std::to_string(line_no_) + ": " +
                             what);
  }

 private:
  std::istringstream in_;
  std::size_t line_no_ = 0;
};

}  // namespace detail

inline TabularMdp read_mdp_text(const std::string& text) {
  detail::LineReader reader(text);
  std::string line;
  if (!reader.next(line) || line != "mdp-v1") reader.fail("expected header 'mdp-v1'");

  auto expect = [&](const char* fmt, auto*... args) {
    if (!reader.next(line)) reader.fail("unexpected end of input");
    int consumed = 0;
    if (std::sscanf(line.c_str(), fmt, args..., &consumed) != static_cast<int>(sizeof...(args)) ||
        consumed != static_cast<int>(line.size()))
      reader.fail("malformed line '" + line + "'");
  };

  unsigned long long num_states = 0;
  expect("num_states %llu%n", &num_states);

  std::vector<std::vector<std::vector<Outcome>>> outcomes(num_states);
  for (unsigned long long s = 0; s < num_states; ++s) {
    unsigned long long sid = 0, num_actions = 0;
    expect("state %llu actions %llu%n", &sid, &num_actions);
    if (sid != s) reader.fail("expected state " + std::to_string(s));
    outcomes[s].resize(num_actions);
    for (unsigned long long a = 0; a < num_actions; ++a) {
      unsigned long long aid = 0, num_outcomes = 0;
      expect("action %llu outcomes %llu%n", &aid, &num_outcomes);
      if (aid != a) reader.fail("expected action " + std::to_string(a));
      outcomes[s][a].resize(num_outcomes);
      for (unsigned long long o = 0; o < num_outcomes; ++o) {
        unsigned long long next = 0;
        double p = 0.0, r = 0.0;
        expect("outcome %llu %lg %lg%n", &next, &p, &r);
        outcomes[s][a][o] = Outcome{static_cast<StateId>(next), p, r};
      }
    }
  }
  if (reader.next(line)) reader.fail("trailing content '" + line + "'");
  return TabularMdp(std::move(outcomes));
}

inline void write_mdp_file(const TabularMdp& mdp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << write_mdp_text(mdp);
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

inline TabularMdp read_mdp_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return read_mdp_text(buf.str());
}

}  // namespace splitq
