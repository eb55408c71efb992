#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "splitq/rng.hpp"

namespace splitq {

// Observation tallies for one (state, action): one count per outcome seen
// so far plus a trailing slot for the hypothetical unknown outcome, whose
// count stays zero by definition.
struct OutcomeCounts {
  std::vector<std::uint64_t> counts{0};

  static OutcomeCounts with_observed(std::vector<std::uint64_t> observed) {
    observed.push_back(0);
    return OutcomeCounts{std::move(observed)};
  }

  std::uint64_t total() const {
    return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  }
};

using ProbabilityVector = std::vector<double>;

enum class SamplerMode { paper_rejection, exact_dirichlet };

// Counters surfaced in experiment diagnostics. `fallbacks` counts
// rejection draws that hit the proposal cap and returned the
// distribution's center instead.
struct SamplerDiagnostics {
  std::uint64_t samples = 0;
  std::uint64_t proposals = 0;
  std::uint64_t fallbacks = 0;

  void merge(const SamplerDiagnostics& other) {
    samples += other.samples;
    proposals += other.proposals;
    fallbacks += other.fallbacks;
  }
};

// Mean of the density proportional to (1-p)^n on [0,1]: the expected mass
// of an outcome never observed in n tries.
inline double unknown_mass_mean(std::uint64_t n) {
  return 1.0 / (static_cast<double>(n) + 2.0);
}

// Likelihood of a probability vector given counts, scaled by its maximum
// over the simplex (attained at p_i = n_i / n, with 0^0 = 1) so the result
// lies in [0,1]. The scaling keeps rejection acceptance rates usable and
// leaves the accepted distribution unchanged.
inline double joint_likelihood(const ProbabilityVector& p, const OutcomeCounts& c) {
  if (p.size() != c.counts.size())
    throw std::invalid_argument("joint_likelihood: length mismatch");
  const std::uint64_t n = c.total();
  if (n == 0) return 1.0;
  double log_ratio = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const std::uint64_t ni = c.counts[i];
    if (ni == 0) continue;
    if (p[i] <= 0.0) return 0.0;
    const double mle = static_cast<double>(ni) / static_cast<double>(n);
    log_ratio += static_cast<double>(ni) * (std::log(p[i]) - std::log(mle));
  }
  return std::min(1.0, std::exp(log_ratio));
}

namespace detail {

constexpr std::uint64_t kRejectionProposalCap = 10000;

// Center of the posterior: observed frequencies scaled to leave the
// unknown slot its mean mass. Serves as the rejection fallback.
inline ProbabilityVector likelihood_center(const OutcomeCounts& c) {
  const std::size_t len = c.counts.size();
  const std::uint64_t n = c.total();
  ProbabilityVector p(len, 0.0);
  const double unknown = unknown_mass_mean(n);
  p[len - 1] = unknown;
  if (n > 0) {
    for (std::size_t i = 0; i + 1 < len; ++i)
      p[i] = (1.0 - unknown) * static_cast<double>(c.counts[i]) / static_cast<double>(n);
  } else if (len > 1) {
    for (std::size_t i = 0; i + 1 < len; ++i) p[i] = (1.0 - unknown) / static_cast<double>(len - 1);
  } else {
    p[0] = 1.0;
  }
  return p;
}

}  // namespace detail

// Draws a probability vector from the posterior implied by the counts.
//
// paper_rejection proposes independent uniforms normalized to sum 1 and
// accepts when a fresh uniform falls below the scaled likelihood. The
// proposal is not uniform on the simplex, so this sampler carries a small
// bias relative to the exact posterior; it is kept as the default
// behaviour and measured against the exact mode in tests.
//
// exact_dirichlet draws Dirichlet(n_i + 1) via normalized unit-scale gamma
// variates: the exact posterior under a uniform prior.
inline ProbabilityVector sample_simplex(const OutcomeCounts& c, RandomSource& rng,
                                        SamplerMode mode,
                                        SamplerDiagnostics* diag = nullptr) {
  const std::size_t len = c.counts.size();
  if (len == 0) throw std::invalid_argument("sample_simplex: empty counts");
  if (diag) ++diag->samples;

  ProbabilityVector p(len);
  if (mode == SamplerMode::exact_dirichlet) {
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      p[i] = rng.next_gamma(static_cast<double>(c.counts[i]) + 1.0);
      sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
  }

  for (std::uint64_t attempt = 0; attempt < detail::kRejectionProposalCap; ++attempt) {
    if (diag) ++diag->proposals;
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
      p[i] = rng.next_double();
      sum += p[i];
    }
    if (sum == 0.0) continue;
    for (double& v : p) v /= sum;
    if (rng.next_double() < joint_likelihood(p, c)) return p;
  }
  if (diag) ++diag->fallbacks;
  return detail::likelihood_center(c);
}

}  // namespace splitq
