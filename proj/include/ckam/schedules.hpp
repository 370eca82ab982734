#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>

namespace ckam {

/// nu_t = (nu0 / 2) [cos(pi mod(t-1, L) / L) + 1], t >= 1, L iterations per cycle.
inline double cosine_stepsize(double nu0, std::uint64_t t, std::uint64_t iterations_per_cycle) {
  if (t < 1) throw std::invalid_argument("cosine_stepsize: t must be >= 1");
  if (iterations_per_cycle < 1) {
    throw std::invalid_argument("cosine_stepsize: iterations_per_cycle must be positive");
  }
  const double frac = static_cast<double>((t - 1) % iterations_per_cycle) /
                      static_cast<double>(iterations_per_cycle);
  return 0.5 * nu0 * (std::cos(std::numbers::pi * frac) + 1.0);
}

/// Cycle-initial stepsize whose cosine schedule passes through nu_exp at
/// fraction beta.
inline double cycle_initial_stepsize(double nu_exp, double beta) {
  return 2.0 * nu_exp / (std::cos(beta * std::numbers::pi) + 1.0);
}

/// Robbins-Monro update on the log scale: exp(log nu + eta (alpha - alpha*)).
inline double rm_stepsize_update(double nu, double alpha, double alpha_star, double eta) {
  if (!(nu > 0.0)) throw std::invalid_argument("rm_stepsize_update: nu must be positive");
  return std::exp(std::log(nu) + eta * (alpha - alpha_star));
}

/// Vanishing adaptation gain (1 + t)^(-rate).
inline double rm_gain(std::uint64_t t, double rate) {
  return std::pow(1.0 + static_cast<double>(t), -rate);
}

/// gamma_t = a (b + t)^(-decay_rate).
inline double noise_schedule(double a, double b, double decay_rate, std::uint64_t t) {
  const double base = b + static_cast<double>(t);
  if (!(base > 0.0)) throw std::invalid_argument("noise_schedule: b + t must be positive");
  return a * std::pow(base, -decay_rate);
}

/// Split of each cycle into an exploration prefix (fraction <= beta) and a
/// sampling suffix.
class CycleSchedule {
public:
  CycleSchedule(std::uint64_t iterations_per_cycle, double exploration_fraction)
      : length_(iterations_per_cycle), beta_(exploration_fraction) {
    if (iterations_per_cycle < 2) {
      throw std::invalid_argument("CycleSchedule: iterations_per_cycle must be >= 2");
    }
    if (!(exploration_fraction > 0.0 && exploration_fraction < 1.0)) {
      throw std::invalid_argument("CycleSchedule: exploration fraction must lie in (0, 1)");
    }
  }

  std::uint64_t iterations_per_cycle() const noexcept { return length_; }
  double exploration_fraction() const noexcept { return beta_; }

  /// mod(t-1, L) / L for t >= 1.
  double fraction(std::uint64_t t) const {
    if (t < 1) throw std::invalid_argument("CycleSchedule: t must be >= 1");
    return static_cast<double>(position_in_cycle(t)) / static_cast<double>(length_);
  }

  std::uint64_t position_in_cycle(std::uint64_t t) const { return (t - 1) % length_; }
  std::uint64_t cycle_index(std::uint64_t t) const { return (t - 1) / length_; }

  bool is_exploration(std::uint64_t t) const { return fraction(t) <= beta_; }
  bool is_sampling(std::uint64_t t) const { return !is_exploration(t); }
  bool is_cycle_start(std::uint64_t t) const { return position_in_cycle(t) == 0; }

  /// Number of exploration iterations in a full cycle.
  std::uint64_t exploration_length() const {
    std::uint64_t n = 0;
    for (std::uint64_t k = 0; k < length_; ++k) {
      if (static_cast<double>(k) / static_cast<double>(length_) <= beta_) ++n;
    }
    return n;
  }

private:
  std::uint64_t length_;
  double beta_;
};

}  // namespace ckam
