#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitq/rng.hpp"

namespace splitq {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

// One possible result of taking an action: successor state, its
// probability, and the (deterministic) reward of the transition.
struct Outcome {
  StateId next_state = 0;
  double probability = 0.0;
  double reward = 0.0;
};

// Complete ground-truth model of a finite MDP. Immutable after
// construction; safe to share across threads.
class TabularMdp {
 public:
  TabularMdp() = default;

  // outcomes[s][a] lists the outcome distribution of action a in state s.
  explicit TabularMdp(std::vector<std::vector<std::vector<Outcome>>> outcomes)
      : outcomes_(std::move(outcomes)) {}

  std::size_t num_states() const { return outcomes_.size(); }

  std::size_t num_actions(StateId s) const {
    check_state(s);
    return outcomes_[s].size();
  }

  const std::vector<Outcome>& outcomes(StateId s, ActionId a) const {
    check_action(s, a);
    return outcomes_[s][a];
  }

  void check_state(StateId s) const {
    if (s >= outcomes_.size())
      throw std::invalid_argument("state index " + std::to_string(s) + " out of range");
  }

  void check_action(StateId s, ActionId a) const {
    check_state(s);
    if (a >= outcomes_[s].size())
      throw std::invalid_argument("action index " + std::to_string(a) + " out of range for state " +
                                  std::to_string(s));
  }

 private:
  std::vector<std::vector<std::vector<Outcome>>> outcomes_;
};

// Checks every structural invariant and reports all violations; never throws.
inline std::vector<std::string> validate(const TabularMdp& mdp) {
  std::vector<std::string> report;
  const StateId n = static_cast<StateId>(mdp.num_states());
  for (StateId s = 0; s < n; ++s) {
    if (mdp.num_actions(s) == 0) {
      report.push_back("(s=" + std::to_string(s) + "): state has no actions");
      continue;
    }
    for (ActionId a = 0; a < static_cast<ActionId>(mdp.num_actions(s)); ++a) {
      const std::string loc = "(s=" + std::to_string(s) + ",a=" + std::to_string(a) + "): ";
      const auto& outs = mdp.outcomes(s, a);
      if (outs.empty()) {
        report.push_back(loc + "action has no outcomes");
        continue;
      }
      double sum = 0.0;
      for (const Outcome& o : outs) {
        if (!(o.probability > 0.0) || o.probability > 1.0 || !std::isfinite(o.probability))
          report.push_back(loc + "outcome probability " + std::to_string(o.probability) +
                           " outside (0,1]");
        if (!std::isfinite(o.reward)) report.push_back(loc + "non-finite reward");
        if (o.next_state >= n)
          report.push_back(loc + "dangling next_state " + std::to_string(o.next_state));
        sum += o.probability;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        report.push_back(loc + "probabilities sum to " + std::to_string(sum));
    }
  }
  return report;
}

// Draws the successor of (s, a). Single-outcome actions consume no
// randomness, which keeps deterministic chains hand-traceable.
inline std::pair<StateId, double> sample_transition(const TabularMdp& mdp, StateId s, ActionId a,
                                                    RandomSource& rng) {
  const auto& outs = mdp.outcomes(s, a);
  if (outs.empty()) throw std::invalid_argument("sample_transition: action has no outcomes");
  if (outs.size() == 1) return {outs[0].next_state, outs[0].reward};
  const double u = rng.next_double();
  double cum = 0.0;
  for (const Outcome& o : outs) {
    cum += o.probability;
    if (u < cum) return {o.next_state, o.reward};
  }
  const Outcome& last = outs.back();  // u landed in rounding slack
  return {last.next_state, last.reward};
}

// Optimal action values via synchronous value iteration. Stops when one
// full sweep moves no entry by more than tol (max-norm), which bounds the
// Bellman residual of the returned table by gamma * tol <= tol.
inline std::vector<std::vector<double>> value_iteration(const TabularMdp& mdp, double gamma,
                                                        double tol,
                                                        std::size_t max_sweeps = 100000) {
  if (!(gamma >= 0.0 && gamma < 1.0))
    throw std::invalid_argument("value_iteration: gamma must be in [0,1)");
  if (!(tol > 0.0)) throw std::invalid_argument("value_iteration: tol must be positive");

  const StateId n = static_cast<StateId>(mdp.num_states());
  std::vector<std::vector<double>> q(n);
  for (StateId s = 0; s < n; ++s) q[s].assign(mdp.num_actions(s), 0.0);

  auto state_value = [&](const std::vector<std::vector<double>>& table, StateId s) {
    double best = -std::numeric_limits<double>::infinity();
    for (double v : table[s]) best = std::max(best, v);
    return table[s].empty() ? 0.0 : best;
  };

  double residual = std::numeric_limits<double>::infinity();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    residual = 0.0;
    std::vector<std::vector<double>> next(n);
    for (StateId s = 0; s < n; ++s) {
      next[s].resize(q[s].size());
      for (ActionId a = 0; a < static_cast<ActionId>(q[s].size()); ++a) {
        double backup = 0.0;
        for (const Outcome& o : mdp.outcomes(s, a))
          backup += o.probability * (o.reward + gamma * state_value(q, o.next_state));
        next[s][a] = backup;
        residual = std::max(residual, std::abs(backup - q[s][a]));
      }
    }
    q = std::move(next);
    if (residual <= tol) return q;
  }
  throw std::runtime_error("value_iteration: no convergence within " +
                           std::to_string(max_sweeps) + " sweeps, last residual " +
                           std::to_string(residual));
}

}  // namespace splitq
