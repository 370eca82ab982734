#pragma once

#include "ckam/linalg.hpp"
#include "ckam/samplers/chain.hpp"
#include "ckam/targets.hpp"

namespace ckam {

struct RandomWalkConfig {
  double stepsize = 1.0;
  std::uint64_t burnin = 0;
};

/// Random-walk Metropolis with isotropic proposal N(theta, nu^2 I).
template <LogDensityModel T>
class RandomWalk {
public:
  RandomWalk(const T& target, Position theta0, RandomWalkConfig config, std::uint64_t seed)
      : target_(&target), config_(config) {
    if (!(config.stepsize > 0.0)) throw std::invalid_argument("rw: stepsize must be positive");
    if (theta0.size() != target.dimension()) {
      throw std::invalid_argument("rw: initial position has the wrong dimension");
    }
    state_.log_density = target.log_density(theta0);
    state_.position = std::move(theta0);
    state_.stepsize = config.stepsize;
    state_.rng.seed(seed);
  }

  const ChainState& state() const noexcept { return state_; }

  StepResult step() {
    const Position xi = standard_normal_vector(state_.rng, state_.position.size());
    const double u = uniform01(state_.rng);
    return transition(xi, u);
  }

  /// One iteration with the standard-normal draw and the acceptance uniform
  /// supplied by the caller.
  StepResult transition(const Position& xi, double u) {
    const Position proposal = state_.position + state_.stepsize * xi;
    const double lp = target_->log_density(proposal);
    const auto [alpha, accept] = metropolis_decision(lp - state_.log_density, u);
    if (accept) {
      state_.position = proposal;
      state_.log_density = lp;
    }
    const bool collected = state_.iteration >= config_.burnin;
    ++state_.iteration;
    return {accept, alpha, collected ? Phase::Collected : Phase::Burnin, state_.stepsize,
            collected};
  }

private:
  const T* target_;
  RandomWalkConfig config_;
  ChainState state_;
};

}  // namespace ckam
