#pragma once

#include "ckam/samplers/kam.hpp"

namespace ckam {

struct CkamConfig {
  KamConfig kam;  // burnin is ignored; only sampling-phase iterations are collected
  std::uint64_t iterations_per_cycle = 1000;
  double exploration_fraction = 0.4;
  double min_stepsize_ratio = 1e-6;  // sampling-phase floor, relative to nu_0
};

/// Cyclical Kernel Adaptive Metropolis.
///
/// Each cycle restarts from the current position with the initial stepsize.
/// Exploration iterations (fraction <= beta) run KAM on the current cycle's
/// history only and adapt nu. At the first sampling iteration the proposal
/// covariance is frozen to Sigma = (gamma / nu_exp)^2 I + M H M^T and nu_0 is
/// chosen so that the cosine schedule passes through nu_exp at beta. Sampling
/// iterations are random-walk Metropolis with N(theta, nu_t^2 Sigma) and are
/// all collected.
template <LogDensityModel T>
class CyclicalKam {
public:
  CyclicalKam(const T& target, Position theta0, KernelSpec kernel, CkamConfig config,
              std::uint64_t seed)
      : target_(&target),
        kernel_(std::move(kernel)),
        config_(config),
        schedule_(config.iterations_per_cycle, config.exploration_fraction) {
    config.kam.validate();
    if (!(config.min_stepsize_ratio > 0.0 && config.min_stepsize_ratio < 1.0)) {
      throw std::invalid_argument("ckam: min_stepsize_ratio must lie in (0, 1)");
    }
    if (theta0.size() != target.dimension()) {
      throw std::invalid_argument("ckam: initial position has the wrong dimension");
    }
    state_.log_density = target.log_density(theta0);
    state_.position = std::move(theta0);
    state_.stepsize = config.kam.stepsize;
    state_.noise = config.kam.noise.at(0);
    state_.rng.seed(seed);
  }

  const ChainState& state() const noexcept { return state_; }
  const CycleSchedule& schedule() const noexcept { return schedule_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }

  /// Frozen sampling-phase covariance of the current cycle (empty before the
  /// first transition).
  const Matrix& frozen_covariance() const noexcept { return sigma_; }
  double cycle_initial_stepsize() const noexcept { return nu0_; }
  double exploration_final_stepsize() const noexcept { return nu_exp_; }
  std::uint64_t transitions() const noexcept { return transitions_; }

  StepResult step() {
    const std::uint64_t t = state_.iteration + 1;
    if (schedule_.is_cycle_start(t)) start_cycle();

    StepResult result;
    if (schedule_.is_exploration(t)) {
      result = detail::kam_iteration(state_, *target_, kernel_, config_.kam, exploration_index_);
      ++exploration_index_;
      result.phase = Phase::Exploration;
      result.collected = false;
    } else {
      if (!frozen_) freeze();
      result = sampling_iteration(t);
    }
    ++state_.iteration;
    return result;
  }

private:
  void start_cycle() {
    state_.history.clear();
    state_.history.push_back(state_.position);
    state_.history_origin = state_.iteration;
    state_.subsample.clear();
    state_.subsample_iterations.clear();
    state_.stepsize = config_.kam.stepsize;
    exploration_index_ = 0;
    frozen_ = false;
  }

  void freeze() {
    nu_exp_ = state_.stepsize;
    nu0_ = ckam::cycle_initial_stepsize(nu_exp_, schedule_.exploration_fraction());
    const double ratio = state_.noise / nu_exp_;
    sigma_ = kam_proposal_covariance(kernel_, state_.position, state_.subsample, ratio, 1.0);
    sigma_chol_ = cholesky_with_jitter(sigma_);
    frozen_ = true;
    ++transitions_;
  }

  StepResult sampling_iteration(std::uint64_t t) {
    // The schedule is read one index behind so that the first sampling
    // proposal uses exactly nu_exp (the schedule value at fraction beta).
    const double nu = std::max(cosine_stepsize(nu0_, t - 1, schedule_.iterations_per_cycle()),
                               config_.min_stepsize_ratio * nu0_);
    state_.stepsize = nu;
    const Position xi = standard_normal_vector(state_.rng, state_.position.size());
    const Position proposal = state_.position + nu * (sigma_chol_.lower * xi);
    const double lp = target_->log_density(proposal);
    const auto [alpha, accept] =
        metropolis_decision(lp - state_.log_density, uniform01(state_.rng));
    if (accept) {
      state_.position = proposal;
      state_.log_density = lp;
    }
    return {accept, alpha, Phase::Sampling, nu, true};
  }

  const T* target_;
  KernelSpec kernel_;
  CkamConfig config_;
  CycleSchedule schedule_;
  ChainState state_;

  std::uint64_t exploration_index_ = 0;
  bool frozen_ = false;
  std::uint64_t transitions_ = 0;
  double nu_exp_ = 0.0;
  double nu0_ = 0.0;
  Matrix sigma_;
  CholeskyFactor sigma_chol_;
};

}  // namespace ckam
