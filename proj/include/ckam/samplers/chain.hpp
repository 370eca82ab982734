#pragma once

#include "ckam/types.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace ckam {

using Rng = std::mt19937_64;

enum class Phase { Burnin, Exploration, Sampling, Collected };

inline std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::Burnin: return "burnin";
    case Phase::Exploration: return "exploration";
    case Phase::Sampling: return "sampling";
    case Phase::Collected: return "collected";
  }
  return "unknown";
}

/// Everything a chain carries between iterations. Samplers use the subset of
/// fields relevant to them.
struct ChainState {
  Position position;
  double log_density = 0.0;
  std::uint64_t iteration = 0;  // completed iterations
  double stepsize = 1.0;
  double noise = 0.0;

  // Kernel-adaptive samplers. history[i] is the position at global
  // iteration history_origin + i.
  std::vector<Position> history;
  std::uint64_t history_origin = 0;
  std::vector<Position> subsample;
  std::vector<std::uint64_t> subsample_iterations;

  // Adaptive-Metropolis family.
  Position mean;
  Matrix covariance;

  Rng rng;
};

/// Outcome of one iteration.
struct StepResult {
  bool accepted = false;
  double acceptance_prob = 0.0;
  Phase phase = Phase::Collected;
  double stepsize = 0.0;  // the stepsize used for this proposal
  bool collected = false;
};

struct TraceRecord {
  std::uint64_t iteration;
  double wall_clock_s;
  Position position;
  Phase phase;
  double stepsize;
  bool accepted;
};

/// Metropolis(-Hastings) decision for log acceptance ratio and uniform u.
/// Returns min(1, exp(log_ratio)) and whether the move is accepted.
inline std::pair<double, bool> metropolis_decision(double log_ratio, double u) {
  const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
  return {alpha, u < alpha};
}

/// Stopping rule for a run; either bound may be absent, both may be set.
struct Budget {
  std::uint64_t max_iterations = 0;
  double max_seconds = 0.0;
  bool has_iterations = false;
  bool has_seconds = false;

  static Budget iterations(std::uint64_t n) { return {n, 0.0, true, false}; }
  static Budget seconds(double s) { return {0, s, false, true}; }
};

/// Sampling clock: either monotonic wall time with pausable diagnostics, or
/// a virtual clock that counts one second per iteration.
class RunClock {
public:
  explicit RunClock(bool virtual_clock) : virtual_(virtual_clock) { start_ = Steady::now(); }

  bool is_virtual() const noexcept { return virtual_; }

  void tick() noexcept { ++ticks_; }

  double seconds() const {
    if (virtual_) return static_cast<double>(ticks_);
    const auto end = paused_ ? pause_start_ : Steady::now();
    return std::chrono::duration<double>(end - start_ - paused_total_).count();
  }

  void pause() {
    if (!paused_) {
      paused_ = true;
      pause_start_ = Steady::now();
    }
  }

  void resume() {
    if (paused_) {
      paused_total_ += Steady::now() - pause_start_;
      paused_ = false;
    }
  }

private:
  using Steady = std::chrono::steady_clock;
  bool virtual_;
  bool paused_ = false;
  std::uint64_t ticks_ = 0;
  Steady::time_point start_;
  Steady::time_point pause_start_;
  Steady::duration paused_total_{0};
};

}  // namespace ckam
