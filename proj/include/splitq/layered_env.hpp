#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "splitq/mdp.hpp"
#include "splitq/rng.hpp"

namespace splitq {

// Layered benchmark environment: one hub state on level 0, m levels of n
// states, k actions per intermediate state. Every trajectory cycles
// level 0 -> 1 -> ... -> m -> 0.
struct LayeredConfig {
  std::uint32_t m = 20;  // level count >= 1
  std::uint32_t n = 10;  // states per level >= 2
  std::uint32_t k = 2;   // actions per intermediate state >= 1
  double reward_low = 0.0;
  double reward_high = 1.0;
  std::uint64_t seed = 1;

  bool operator==(const LayeredConfig&) const = default;
};

inline void check_layered_config(const LayeredConfig& cfg) {
  if (cfg.m < 1) throw std::invalid_argument("layered config: m must be >= 1");
  if (cfg.n < 2) throw std::invalid_argument("layered config: n must be >= 2");
  if (cfg.k < 1) throw std::invalid_argument("layered config: k must be >= 1");
  if (!std::isfinite(cfg.reward_low) || !std::isfinite(cfg.reward_high) ||
      cfg.reward_low > cfg.reward_high)
    throw std::invalid_argument("layered config: reward bounds must be finite with low <= high");
}

// Builds the layered MDP. All draws come from a RandomSource seeded with
// cfg.seed in a fixed order (states ascending, actions ascending), so the
// same config always produces a byte-identical serialization.
//
// State indexing: 0 is the level-0 hub; level l in 1..m, slot j in 0..n-1
// is state 1 + (l-1)*n + j.
inline TabularMdp generate_layered(const LayeredConfig& cfg) {
  check_layered_config(cfg);
  RandomSource rng(cfg.seed);

  const auto state_at = [&](std::uint32_t level, std::uint32_t slot) -> StateId {
    return 1 + (level - 1) * cfg.n + slot;
  };
  auto draw_reward = [&] {
    return cfg.reward_low + (cfg.reward_high - cfg.reward_low) * rng.next_double();
  };

  std::vector<std::vector<std::vector<Outcome>>> outcomes(1 + std::size_t{cfg.m} * cfg.n);

  // Level 0: action j leads deterministically to slot j of level 1.
  outcomes[0].resize(cfg.n);
  for (std::uint32_t j = 0; j < cfg.n; ++j)
    outcomes[0][j] = {Outcome{state_at(1, j), 1.0, draw_reward()}};

  // Intermediate levels 1..m-1: k actions, each splitting (p, 1-p) over
  // two distinct states of the next level.
  for (std::uint32_t level = 1; level < cfg.m; ++level) {
    for (std::uint32_t j = 0; j < cfg.n; ++j) {
      auto& acts = outcomes[state_at(level, j)];
      acts.resize(cfg.k);
      for (std::uint32_t a = 0; a < cfg.k; ++a) {
        const std::uint32_t first = static_cast<std::uint32_t>(rng.next_below(cfg.n));
        std::uint32_t second = static_cast<std::uint32_t>(rng.next_below(cfg.n - 1));
        if (second >= first) ++second;  // without replacement
        double p = rng.next_double();
        while (p <= 0.0) p = rng.next_double();  // keep both outcomes reachable
        acts[a] = {Outcome{state_at(level + 1, first), p, draw_reward()},
                   Outcome{state_at(level + 1, second), 1.0 - p, draw_reward()}};
      }
    }
  }

  // Last level: single action back to the hub.
  for (std::uint32_t j = 0; j < cfg.n; ++j)
    outcomes[state_at(cfg.m, j)] = {{Outcome{0, 1.0, draw_reward()}}};

  return TabularMdp(std::move(outcomes));
}

// Level of a state under the indexing above (0 for the hub).
inline std::uint32_t layered_level(const LayeredConfig& cfg, StateId s) {
  return s == 0 ? 0 : 1 + (s - 1) / cfg.n;
}

}  // namespace splitq
