#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <vector>

#include "splitq/mdp.hpp"
#include "splitq/posterior.hpp"
#include "splitq/rng.hpp"
#include "splitq/running_stats.hpp"

namespace splitq {

enum class AgentKind { q_learning, split_q, uncertain_split_q };
enum class AlphaDecay { constant, inverse_count };

// Step index meaning "epsilon is never turned off".
inline constexpr std::uint64_t kNeverStep = std::numeric_limits<std::uint64_t>::max();

struct AgentConfig {
  double alpha = 0.1;                 // learning rate, (0,1]
  double gamma = 0.9;                 // discount factor, [0,1)
  double epsilon = 0.1;               // exploration rate, [0,1]
  std::uint64_t epsilon_off_step = kNeverStep;
  double r_max = 1.0;                 // known largest one-step reward
  double r_min = 0.0;
  double sigma_init = 0.5;            // prior std for unseen entries, as a fraction of the return range
  double ewma_beta = 0.1;
  SamplerMode sampler_mode = SamplerMode::paper_rejection;
  bool unknown_enabled = true;
  StatMode stats_mode = StatMode::ewma;
  AlphaDecay alpha_decay = AlphaDecay::constant;

  bool operator==(const AgentConfig&) const = default;
};

inline void validate_agent_config(const AgentConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0))
    throw std::invalid_argument("agent config: alpha must be in (0,1]");
  if (!(cfg.gamma >= 0.0 && cfg.gamma < 1.0))
    throw std::invalid_argument("agent config: gamma must be in [0,1)");
  if (!(cfg.epsilon >= 0.0 && cfg.epsilon <= 1.0))
    throw std::invalid_argument("agent config: epsilon must be in [0,1]");
  if (!(cfg.sigma_init >= 0.0))
    throw std::invalid_argument("agent config: sigma_init must be >= 0");
  if (!(cfg.ewma_beta > 0.0 && cfg.ewma_beta <= 1.0))
    throw std::invalid_argument("agent config: ewma_beta must be in (0,1]");
  if (!std::isfinite(cfg.r_max) || !std::isfinite(cfg.r_min) || cfg.r_min > cfg.r_max)
    throw std::invalid_argument("agent config: require finite r_min <= r_max");
}

// Supremum of any discounted return: the optimistic initial value and the
// value of the unknown-outcome slot.
inline double optimistic_q_max(const AgentConfig& cfg) { return cfg.r_max / (1.0 - cfg.gamma); }

// Infimum of any discounted return; lower clamp for sampled values.
inline double q_floor(const AgentConfig& cfg) { return cfg.r_min / (1.0 - cfg.gamma); }

inline double effective_epsilon(const AgentConfig& cfg, std::uint64_t step) {
  return step >= cfg.epsilon_off_step ? 0.0 : cfg.epsilon;
}

namespace detail {

// Argmax with uniform tie-breaking; consumes randomness only on a genuine tie.
inline ActionId argmax_with_ties(const std::vector<double>& values, RandomSource& rng) {
  const ActionId n = static_cast<ActionId>(values.size());
  double best = values[0];
  for (double v : values) best = std::max(best, v);
  std::uint32_t ties = 0;
  ActionId first = 0;
  for (ActionId i = 0; i < n; ++i) {
    if (values[i] == best && ties++ == 0) first = i;
  }
  if (ties <= 1) return first;
  std::uint64_t pick = rng.next_below(ties);
  for (ActionId i = 0; i < n; ++i) {
    if (values[i] == best && pick-- == 0) return i;
  }
  return first;  // unreachable
}

}  // namespace detail

inline ActionId select_epsilon_greedy(const std::vector<double>& values, const AgentConfig& cfg,
                                      std::uint64_t step, RandomSource& rng) {
  if (values.empty()) throw std::invalid_argument("select_epsilon_greedy: no actions");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("select_epsilon_greedy: non-finite value");
  const double eps = effective_epsilon(cfg, step);
  if (eps > 0.0 && rng.next_double() < eps)
    return static_cast<ActionId>(rng.next_below(values.size()));
  return detail::argmax_with_ties(values, rng);
}

// ---------------------------------------------------------------------------
// Ordinary action-value table.

class QTable {
 public:
  QTable(std::size_t num_states, const std::vector<std::size_t>& actions_per_state,
         double initial_value) {
    if (actions_per_state.size() != num_states)
      throw std::invalid_argument("QTable: actions_per_state size mismatch");
    q_.resize(num_states);
    visits_.resize(num_states);
    for (std::size_t s = 0; s < num_states; ++s) {
      q_[s].assign(actions_per_state[s], initial_value);
      visits_[s].assign(actions_per_state[s], 0);
    }
  }

  static QTable for_mdp(const TabularMdp& mdp, double initial_value) {
    std::vector<std::size_t> actions(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) actions[s] = mdp.num_actions(s);
    return QTable(mdp.num_states(), actions, initial_value);
  }

  std::size_t num_states() const { return q_.size(); }
  std::size_t num_actions(StateId s) const { return row(s).size(); }

  const std::vector<double>& row(StateId s) const {
    check_state(s);
    return q_[s];
  }

  double value(StateId s, ActionId a) const {
    check(s, a);
    return q_[s][a];
  }

  std::uint64_t visits(StateId s, ActionId a) const {
    check(s, a);
    return visits_[s][a];
  }

  double state_value(StateId s) const {
    const auto& r = row(s);
    return *std::max_element(r.begin(), r.end());
  }

  void apply_update(StateId s, ActionId a, double new_value) {
    check(s, a);
    q_[s][a] = new_value;
    ++visits_[s][a];
  }

 private:
  void check_state(StateId s) const {
    if (s >= q_.size()) throw std::invalid_argument("QTable: state out of range");
  }
  void check(StateId s, ActionId a) const {
    check_state(s);
    if (a >= q_[s].size()) throw std::invalid_argument("QTable: action out of range");
  }

  std::vector<std::vector<double>> q_;
  std::vector<std::vector<std::uint64_t>> visits_;
};

inline double update_step_size(const AgentConfig& cfg, std::uint64_t prior_count) {
  return cfg.alpha_decay == AlphaDecay::inverse_count
             ? 1.0 / static_cast<double>(prior_count + 1)
             : cfg.alpha;
}

inline void q_update(QTable& table, StateId s, ActionId a, double reward, StateId next,
                     const AgentConfig& cfg) {
  if (!std::isfinite(reward)) throw std::invalid_argument("q_update: non-finite reward");
  const double target = reward + cfg.gamma * table.state_value(next);
  const double alpha = update_step_size(cfg, table.visits(s, a));
  table.apply_update(s, a, table.value(s, a) + alpha * (target - table.value(s, a)));
}

// ---------------------------------------------------------------------------
// Split action-value table: one entry per observed successor of (s, a),
// each with its own online dispersion estimate, plus a reserved unknown
// slot valued optimistically on demand.

struct SplitEntry {
  StateId next_state;
  double q;
  std::uint64_t count;
  MeanVarAccumulator stats;
};

class SplitQTable {
 public:
  struct Cell {
    std::vector<SplitEntry> entries;  // in first-seen order
    std::uint64_t total = 0;          // sum of entry counts
  };

  SplitQTable(std::size_t num_states, const std::vector<std::size_t>& actions_per_state) {
    if (actions_per_state.size() != num_states)
      throw std::invalid_argument("SplitQTable: actions_per_state size mismatch");
    cells_.resize(num_states);
    for (std::size_t s = 0; s < num_states; ++s) cells_[s].resize(actions_per_state[s]);
  }

  static SplitQTable for_mdp(const TabularMdp& mdp) {
    std::vector<std::size_t> actions(mdp.num_states());
    for (StateId s = 0; s < mdp.num_states(); ++s) actions[s] = mdp.num_actions(s);
    return SplitQTable(mdp.num_states(), actions);
  }

  std::size_t num_states() const { return cells_.size(); }
  std::size_t num_actions(StateId s) const {
    check_state(s);
    return cells_[s].size();
  }

  const Cell& cell(StateId s, ActionId a) const {
    check(s, a);
    return cells_[s][a];
  }

  const SplitEntry* find(StateId s, ActionId a, StateId next) const {
    for (const SplitEntry& e : cell(s, a).entries)
      if (e.next_state == next) return &e;
    return nullptr;
  }

  // Entry for (s, a, next), created optimistically on first sight.
  SplitEntry& find_or_create(StateId s, ActionId a, StateId next, const AgentConfig& cfg) {
    check(s, a);
    for (SplitEntry& e : cells_[s][a].entries)
      if (e.next_state == next) return e;
    auto stats = cfg.stats_mode == StatMode::ewma ? MeanVarAccumulator::ewma(cfg.ewma_beta)
                                                  : MeanVarAccumulator::cumulative();
    cells_[s][a].entries.push_back(SplitEntry{next, optimistic_q_max(cfg), 0, stats});
    return cells_[s][a].entries.back();
  }

  void note_visit(StateId s, ActionId a) { cells_[s][a].total += 1; }

 private:
  void check_state(StateId s) const {
    if (s >= cells_.size()) throw std::invalid_argument("SplitQTable: state out of range");
  }
  void check(StateId s, ActionId a) const {
    check_state(s);
    if (a >= cells_[s].size()) throw std::invalid_argument("SplitQTable: action out of range");
  }

  std::vector<std::vector<Cell>> cells_;
};

// Total action value: successor entries weighted by estimated transition
// probabilities. With the unknown slot enabled, the slot gets its mean
// posterior mass and the observed frequencies share the rest; the slot is
// valued at the optimistic bound. An unvisited pair is worth exactly that
// bound.
inline double combine_q(const SplitQTable& table, StateId s, ActionId a, const AgentConfig& cfg,
                        bool unknown_enabled) {
  const auto& cell = table.cell(s, a);
  if (cell.total == 0) return optimistic_q_max(cfg);
  const double n = static_cast<double>(cell.total);
  double observed = 0.0;
  for (const SplitEntry& e : cell.entries)
    observed += static_cast<double>(e.count) / n * e.q;
  if (!unknown_enabled) return observed;
  const double u = unknown_mass_mean(cell.total);
  return (1.0 - u) * observed + u * optimistic_q_max(cfg);
}

inline double combine_q(const SplitQTable& table, StateId s, ActionId a, const AgentConfig& cfg) {
  return combine_q(table, s, a, cfg, cfg.unknown_enabled);
}

// combine_q with the environment's true transition probabilities in place
// of empirical frequencies; successors never seen keep the optimistic
// value. Test and diagnostic path.
inline double combine_q_exact(const SplitQTable& table, const TabularMdp& mdp, StateId s,
                              ActionId a, const AgentConfig& cfg) {
  double value = 0.0;
  for (const Outcome& o : mdp.outcomes(s, a)) {
    const SplitEntry* e = table.find(s, a, o.next_state);
    value += o.probability * (e ? e->q : optimistic_q_max(cfg));
  }
  return value;
}

inline double split_state_value(const SplitQTable& table, StateId s, const AgentConfig& cfg) {
  const ActionId n = static_cast<ActionId>(table.num_actions(s));
  double best = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < n; ++a) best = std::max(best, combine_q(table, s, a, cfg));
  return best;
}

// Core split update against a caller-supplied bootstrap value for the
// successor state. The updated entry value is pushed into the entry's
// dispersion accumulator.
inline void split_q_update_with_target(SplitQTable& table, StateId s, ActionId a, double reward,
                                       StateId next, double next_state_value,
                                       const AgentConfig& cfg) {
  if (!std::isfinite(reward)) throw std::invalid_argument("split_q_update: non-finite reward");
  SplitEntry& e = table.find_or_create(s, a, next, cfg);
  const double target = reward + cfg.gamma * next_state_value;
  const double alpha = update_step_size(cfg, e.count);
  e.q += alpha * (target - e.q);
  e.stats.push(e.q);
  e.count += 1;
  table.note_visit(s, a);
}

// Standard form: the bootstrap uses the deterministic frequency-based
// combination, never a sampled one, so environment stochasticity cannot
// leak into the update target.
inline void split_q_update(SplitQTable& table, StateId s, ActionId a, double reward, StateId next,
                           const AgentConfig& cfg) {
  split_q_update_with_target(table, s, a, reward, next, split_state_value(table, next, cfg), cfg);
}

// Thompson-style selection: per action, sample transition probabilities
// from their posterior and entry values from Gaussians widened by the
// empirical dispersion; the unknown slot enters deterministically at the
// optimistic bound. Returns the argmax of the sampled combinations.
inline ActionId select_uncertain(const SplitQTable& table, StateId s, const AgentConfig& cfg,
                                 RandomSource& rng, SamplerDiagnostics* diag = nullptr) {
  const std::size_t num_actions = table.num_actions(s);
  if (num_actions == 0) throw std::invalid_argument("select_uncertain: state has no actions");
  const double hi = optimistic_q_max(cfg);
  const double lo = q_floor(cfg);
  const double prior_sd = cfg.sigma_init * (hi - lo);

  std::vector<double> sampled(num_actions);
  OutcomeCounts counts;
  for (ActionId a = 0; a < static_cast<ActionId>(num_actions); ++a) {
    const auto& cell = table.cell(s, a);
    counts.counts.assign(cell.entries.size() + 1, 0);
    for (std::size_t i = 0; i < cell.entries.size(); ++i) counts.counts[i] = cell.entries[i].count;
    const ProbabilityVector p = sample_simplex(counts, rng, cfg.sampler_mode, diag);

    double value = p.back() * hi;
    for (std::size_t i = 0; i < cell.entries.size(); ++i) {
      const SplitEntry& e = cell.entries[i];
      const double sd = e.stats.std_dev(prior_sd);
      const double q = sd > 0.0 ? std::clamp(rng.next_normal(e.q, sd), lo, hi) : e.q;
      value += p[i] * q;
    }
    sampled[a] = value;
  }
  return detail::argmax_with_ties(sampled, rng);
}

// ---------------------------------------------------------------------------
// Agents: a uniform stepping interface over the three algorithms.

namespace detail {
inline const AgentConfig& validated(const AgentConfig& cfg) {
  validate_agent_config(cfg);
  return cfg;
}
}  // namespace detail

class Agent {
 public:
  virtual ~Agent() = default;
  virtual ActionId select(StateId s, std::uint64_t step, RandomSource& rng) = 0;
  virtual void update(StateId s, ActionId a, double reward, StateId next) = 0;
  virtual SamplerDiagnostics sampler_diagnostics() const { return {}; }
};

class QLearningAgent : public Agent {
 public:
  QLearningAgent(const TabularMdp& env, const AgentConfig& cfg)
      : cfg_(detail::validated(cfg)), table_(QTable::for_mdp(env, optimistic_q_max(cfg))) {}

  ActionId select(StateId s, std::uint64_t step, RandomSource& rng) override {
    return select_epsilon_greedy(table_.row(s), cfg_, step, rng);
  }

  void update(StateId s, ActionId a, double reward, StateId next) override {
    q_update(table_, s, a, reward, next, cfg_);
  }

  const QTable& table() const { return table_; }

 private:
  AgentConfig cfg_;
  QTable table_;
};

// Greedy split agent: epsilon-greedy over combined split values. While
// exploring it keeps the unknown-outcome mass (when enabled); after the
// epsilon cut-off it scores actions by pure observed frequencies.
class SplitQAgent : public Agent {
 public:
  SplitQAgent(const TabularMdp& env, const AgentConfig& cfg)
      : cfg_(detail::validated(cfg)), table_(SplitQTable::for_mdp(env)) {}

  ActionId select(StateId s, std::uint64_t step, RandomSource& rng) override {
    const bool unknown = cfg_.unknown_enabled && step < cfg_.epsilon_off_step;
    std::vector<double> values(table_.num_actions(s));
    for (ActionId a = 0; a < static_cast<ActionId>(values.size()); ++a)
      values[a] = combine_q(table_, s, a, cfg_, unknown);
    return select_epsilon_greedy(values, cfg_, step, rng);
  }

  void update(StateId s, ActionId a, double reward, StateId next) override {
    split_q_update(table_, s, a, reward, next, cfg_);
  }

  const SplitQTable& table() const { return table_; }

 private:
  AgentConfig cfg_;
  SplitQTable table_;
};

class UncertainSplitQAgent : public Agent {
 public:
  UncertainSplitQAgent(const TabularMdp& env, const AgentConfig& cfg)
      : cfg_(detail::validated(cfg)), table_(SplitQTable::for_mdp(env)) {}

  ActionId select(StateId s, std::uint64_t /*step*/, RandomSource& rng) override {
    return select_uncertain(table_, s, cfg_, rng, &diag_);
  }

  void update(StateId s, ActionId a, double reward, StateId next) override {
    split_q_update(table_, s, a, reward, next, cfg_);
  }

  SamplerDiagnostics sampler_diagnostics() const override { return diag_; }

  const SplitQTable& table() const { return table_; }

 private:
  AgentConfig cfg_;
  SplitQTable table_;
  SamplerDiagnostics diag_;
};

inline std::unique_ptr<Agent> make_agent(AgentKind kind, const TabularMdp& env,
                                         const AgentConfig& cfg) {
  switch (kind) {
    case AgentKind::q_learning: return std::make_unique<QLearningAgent>(env, cfg);
    case AgentKind::split_q: return std::make_unique<SplitQAgent>(env, cfg);
    case AgentKind::uncertain_split_q: return std::make_unique<UncertainSplitQAgent>(env, cfg);
  }
  throw std::invalid_argument("make_agent: unknown agent kind");
}

}  // namespace splitq
