#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace splitq {

enum class StatMode { cumulative, ewma };

// Online mean/variance accumulator.
//
// cumulative: Welford's one-pass recurrence (sum of squared deviations,
// never the raw E[x^2] - E[x]^2 difference of large sums).
// ewma: exponentially weighted mean and second moment; the first push
// initializes both moments so a constant stream has zero variance.
class MeanVarAccumulator {
 public:
  static MeanVarAccumulator cumulative() { return MeanVarAccumulator(StatMode::cumulative, 0.0); }

  static MeanVarAccumulator ewma(double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
      throw std::invalid_argument("MeanVarAccumulator: ewma beta must be in (0,1]");
    return MeanVarAccumulator(StatMode::ewma, beta);
  }

  void push(double x) {
    if (!std::isfinite(x)) throw std::invalid_argument("MeanVarAccumulator::push: non-finite value");
    ++count_;
    if (mode_ == StatMode::cumulative) {
      const double delta = x - mean_;
      mean_ += delta / static_cast<double>(count_);
      second_ += delta * (x - mean_);
    } else {
      if (count_ == 1) {
        mean_ = x;
        second_ = x * x;
      } else {
        mean_ = (1.0 - beta_) * mean_ + beta_ * x;
        second_ = (1.0 - beta_) * second_ + beta_ * x * x;
      }
    }
  }

  std::uint64_t count() const { return count_; }
  StatMode mode() const { return mode_; }

  double mean() const { return mean_; }

  // Population variance; clamped at zero against floating-point dips.
  double variance() const {
    if (count_ == 0) return 0.0;
    const double v = mode_ == StatMode::cumulative
                         ? second_ / static_cast<double>(count_)
                         : second_ - mean_ * mean_;
    return v > 0.0 ? v : 0.0;
  }

  // Fewer than two observations carry no variance evidence, so the
  // caller-supplied prior is returned instead of a misleading zero.
  double std_dev(double sigma_init) const {
    if (sigma_init < 0.0) throw std::invalid_argument("std_dev: sigma_init must be >= 0");
    if (count_ < 2) return sigma_init;
    return std::sqrt(variance());
  }

 private:
  MeanVarAccumulator(StatMode mode, double beta) : mode_(mode), beta_(beta) {}

  StatMode mode_;
  double beta_;
  std::uint64_t count_ = 0;
  double mean_ = 0.0;
  double second_ = 0.0;  // sum of squared deviations (cumulative) or E[x^2] (ewma)
};

}  // namespace splitq
