#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "splitq/agents.hpp"
#include "splitq/layered_env.hpp"
#include "splitq/mdp.hpp"
#include "splitq/rng.hpp"

namespace splitq {

struct AgentSpec {
  std::string name;
  AgentKind kind = AgentKind::q_learning;
  AgentConfig config;

  bool operator==(const AgentSpec&) const = default;
};

struct ExperimentConfig {
  LayeredConfig env;
  std::vector<AgentSpec> agents;
  std::uint64_t steps = 1000;
  std::uint64_t trials = 100;
  std::uint64_t master_seed = 1;
  std::uint64_t smoothing_window = 100;
  std::string output_path = "out";

  bool operator==(const ExperimentConfig&) const = default;
};

inline void validate_experiment_config(const ExperimentConfig& cfg) {
  check_layered_config(cfg.env);
  if (cfg.steps < 1) throw std::invalid_argument("experiment config: steps must be >= 1");
  if (cfg.trials < 1) throw std::invalid_argument("experiment config: trials must be >= 1");
  if (cfg.smoothing_window < 1)
    throw std::invalid_argument("experiment config: smoothing_window must be >= 1");
  for (const AgentSpec& spec : cfg.agents) validate_agent_config(spec.config);
}

// Mean reward per step across trials, with its standard error.
struct RewardCurve {
  std::string agent;
  std::vector<double> mean;
  std::vector<double> std_error;
  std::string config_digest;
};

struct ExperimentResult {
  std::vector<RewardCurve> curves;
  SamplerDiagnostics sampler;
};

// Seed-derivation role tags. Every trial draws a fresh environment seed;
// every (trial, agent) pair gets its own stream covering both action
// selection and environment transitions.
inline constexpr std::uint64_t kSeedTagEnv = 1;
inline constexpr std::uint64_t kSeedTagAgentBase = 1000;

struct TrialResult {
  std::vector<double> rewards;
  SamplerDiagnostics diag;
};

// One continuing trajectory from the hub state. Deterministic given
// (env, spec, steps, trial_seed).
inline TrialResult run_trial(const TabularMdp& env, const AgentSpec& spec, std::uint64_t steps,
                             std::uint64_t trial_seed) {
  std::unique_ptr<Agent> agent = make_agent(spec.kind, env, spec.config);
  RandomSource rng(trial_seed);
  TrialResult result;
  result.rewards.resize(steps);
  StateId s = 0;
  for (std::uint64_t step = 0; step < steps; ++step) {
    try {
      const ActionId a = agent->select(s, step, rng);
      const auto [next, reward] = sample_transition(env, s, a, rng);
      agent->update(s, a, reward, next);
      result.rewards[step] = reward;
      s = next;
    } catch (const std::exception& e) {
      throw std::runtime_error("step " + std::to_string(step) + ": " + e.what());
    }
  }
  result.diag = agent->sampler_diagnostics();
  return result;
}

namespace detail {

// Trials are aggregated in fixed blocks of this size. Block partial sums
// are computed sequentially in trial order and merged in block order, so
// the floating-point reduction tree is independent of the worker count.
inline constexpr std::uint64_t kTrialBlock = 16;

struct BlockPartial {
  std::vector<std::vector<double>> sum;    // [agent][step]
  std::vector<std::vector<double>> sumsq;  // [agent][step]
  SamplerDiagnostics diag;
};

}  // namespace detail

// Runs trials * agents trajectories: per trial a fresh layered environment
// (seed derived from master_seed) shared by all agents, each agent with its
// own derived stream. Output is a pure function of cfg; `workers` affects
// wall-clock only.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, unsigned workers = 0) {
  validate_experiment_config(cfg);
  if (cfg.agents.empty()) throw std::invalid_argument("experiment config: no agents configured");
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  const std::size_t num_agents = cfg.agents.size();
  const std::uint64_t num_blocks = (cfg.trials + detail::kTrialBlock - 1) / detail::kTrialBlock;

  auto make_zero = [&] {
    return std::vector<std::vector<double>>(num_agents, std::vector<double>(cfg.steps, 0.0));
  };
  std::vector<std::vector<double>> total_sum = make_zero();
  std::vector<std::vector<double>> total_sumsq = make_zero();
  SamplerDiagnostics total_diag;

  std::atomic<std::uint64_t> next_block{0};
  std::mutex merge_mu;
  std::map<std::uint64_t, detail::BlockPartial> parked;
  std::uint64_t merge_next = 0;
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto run_block = [&](std::uint64_t block) {
    detail::BlockPartial part{make_zero(), make_zero(), {}};
    const std::uint64_t lo = block * detail::kTrialBlock;
    const std::uint64_t hi = std::min(cfg.trials, lo + detail::kTrialBlock);
    for (std::uint64_t trial = lo; trial < hi; ++trial) {
      LayeredConfig env_cfg = cfg.env;
      env_cfg.seed = derive_seed(cfg.master_seed, trial, kSeedTagEnv);
      const TabularMdp env = generate_layered(env_cfg);
      for (std::size_t ai = 0; ai < num_agents; ++ai) {
        try {
          const TrialResult tr =
              run_trial(env, cfg.agents[ai], cfg.steps,
                        derive_seed(cfg.master_seed, trial, kSeedTagAgentBase + ai));
          for (std::uint64_t t = 0; t < cfg.steps; ++t) {
            part.sum[ai][t] += tr.rewards[t];
            part.sumsq[ai][t] += tr.rewards[t] * tr.rewards[t];
          }
          part.diag.merge(tr.diag);
        } catch (const std::exception& e) {
          throw std::runtime_error("trial " + std::to_string(trial) + ", agent '" +
                                   cfg.agents[ai].name + "': " + e.what());
        }
      }
    }
    // Merge strictly in block order; out-of-order blocks wait parked.
    std::lock_guard<std::mutex> lock(merge_mu);
    parked.emplace(block, std::move(part));
    while (!parked.empty() && parked.begin()->first == merge_next) {
      detail::BlockPartial& p = parked.begin()->second;
      for (std::size_t ai = 0; ai < num_agents; ++ai)
        for (std::uint64_t t = 0; t < cfg.steps; ++t) {
          total_sum[ai][t] += p.sum[ai][t];
          total_sumsq[ai][t] += p.sumsq[ai][t];
        }
      total_diag.merge(p.diag);
      parked.erase(parked.begin());
      ++merge_next;
    }
  };

  auto worker_loop = [&] {
    for (;;) {
      const std::uint64_t block = next_block.fetch_add(1);
      if (block >= num_blocks) return;
      try {
        run_block(block);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  if (workers <= 1 || num_blocks <= 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    const unsigned count = static_cast<unsigned>(std::min<std::uint64_t>(workers, num_blocks));
    pool.reserve(count);
    for (unsigned i = 0; i < count; ++i) pool.emplace_back(worker_loop);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  if (merge_next != num_blocks)
    throw std::runtime_error("experiment aborted before all trials completed");

  ExperimentResult result;
  result.sampler = total_diag;
  const double n = static_cast<double>(cfg.trials);
  for (std::size_t ai = 0; ai < num_agents; ++ai) {
    RewardCurve curve;
    curve.agent = cfg.agents[ai].name;
    curve.mean.resize(cfg.steps);
    curve.std_error.assign(cfg.steps, 0.0);
    for (std::uint64_t t = 0; t < cfg.steps; ++t) {
      const double mean = total_sum[ai][t] / n;
      curve.mean[t] = mean;
      if (cfg.trials > 1) {
        const double var = std::max(0.0, (total_sumsq[ai][t] - n * mean * mean) / (n - 1.0));
        curve.std_error[t] = std::sqrt(var / n);
      }
    }
    result.curves.push_back(std::move(curve));
  }
  return result;
}

// Reference aggregation: per-step mean and standard error over stored
// per-trial sequences, summed in trial order. run_experiment's blocked
// reduction is cross-checked against this.
inline RewardCurve aggregate_trials(const std::string& agent,
                                    const std::vector<std::vector<double>>& per_trial) {
  if (per_trial.empty()) throw std::invalid_argument("aggregate_trials: no trials");
  const std::size_t steps = per_trial[0].size();
  const double n = static_cast<double>(per_trial.size());
  RewardCurve curve;
  curve.agent = agent;
  curve.mean.assign(steps, 0.0);
  curve.std_error.assign(steps, 0.0);
  for (const auto& seq : per_trial) {
    if (seq.size() != steps) throw std::invalid_argument("aggregate_trials: ragged trials");
    for (std::size_t t = 0; t < steps; ++t) curve.mean[t] += seq[t];
  }
  for (std::size_t t = 0; t < steps; ++t) curve.mean[t] /= n;
  if (per_trial.size() > 1) {
    for (const auto& seq : per_trial)
      for (std::size_t t = 0; t < steps; ++t) {
        const double d = seq[t] - curve.mean[t];
        curve.std_error[t] += d * d;
      }
    for (std::size_t t = 0; t < steps; ++t)
      curve.std_error[t] = std::sqrt(curve.std_error[t] / (n - 1.0) / n);
  }
  return curve;
}

// Windowed block means for display; window 1 is the identity. Smoothed
// point i covers raw steps [i*window, min((i+1)*window, steps)).
inline RewardCurve smooth_curve(const RewardCurve& curve, std::uint64_t window) {
  if (window < 1) throw std::invalid_argument("smooth_curve: window must be >= 1");
  if (window == 1) return curve;
  RewardCurve out;
  out.agent = curve.agent;
  out.config_digest = curve.config_digest;
  const std::size_t n = curve.mean.size();
  for (std::size_t lo = 0; lo < n; lo += window) {
    const std::size_t hi = std::min(n, lo + window);
    double m = 0.0, se = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      m += curve.mean[i];
      se += curve.std_error[i];
    }
    const double count = static_cast<double>(hi - lo);
    out.mean.push_back(m / count);
    out.std_error.push_back(se / count);
  }
  return out;
}

}  // namespace splitq
