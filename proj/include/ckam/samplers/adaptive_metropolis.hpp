#pragma once

#include "ckam/linalg.hpp"
#include "ckam/samplers/chain.hpp"
#include "ckam/schedules.hpp"
#include "ckam/targets.hpp"

namespace ckam {

enum class AdaptiveVariant {
  Am,    // learned covariance, fixed stepsize, fixed gain
  Rbam,  // AM recursion on the Rao-Blackwellised point alpha theta' + (1-alpha) theta
  Gam,   // AM recursion plus global log-scale adaptation toward alpha*
};

struct AdaptiveMetropolisConfig {
  AdaptiveVariant variant = AdaptiveVariant::Am;
  double stepsize = 1.0;        // proposal scale; GAM adapts it
  double gain = 0.1;            // fixed eta for AM and RBAM
  double rm_rate = 0.75;        // GAM gain exponent: eta_t = (1 + t)^(-rm_rate)
  double target_accept = 0.234;
  double init_cov_scale = 1.0;  // Sigma_0 = scale * I
  std::uint64_t burnin = 0;
};

/// mu <- mu + eta (x - mu); Sigma <- Sigma + eta ((x - mu_old)(x - mu_old)^T - Sigma).
inline void update_moments(Position& mean, Matrix& cov, const Position& x, double eta) {
  const Position centered = x - mean;
  cov += eta * (centered * centered.transpose() - cov);
  cov = 0.5 * (cov + cov.transpose());
  mean += eta * centered;
}

/// AM, RBAM and GAM: proposal N(theta, nu^2 Sigma_t) with a stochastic
/// approximation of the target mean and covariance.
template <LogDensityModel T>
class AdaptiveMetropolis {
public:
  AdaptiveMetropolis(const T& target, Position theta0, AdaptiveMetropolisConfig config,
                     std::uint64_t seed)
      : target_(&target), config_(config) {
    if (!(config.stepsize > 0.0)) throw std::invalid_argument("am: stepsize must be positive");
    if (!(config.init_cov_scale > 0.0)) {
      throw std::invalid_argument("am: initial covariance scale must be positive");
    }
    if (config.variant != AdaptiveVariant::Gam && !(config.gain > 0.0 && config.gain <= 1.0)) {
      throw std::invalid_argument("am: gain must lie in (0, 1]");
    }
    if (theta0.size() != target.dimension()) {
      throw std::invalid_argument("am: initial position has the wrong dimension");
    }
    const auto d = theta0.size();
    state_.log_density = target.log_density(theta0);
    state_.mean = theta0;
    state_.position = std::move(theta0);
    state_.covariance = config.init_cov_scale * Matrix::Identity(d, d);
    state_.stepsize = config.stepsize;
    state_.rng.seed(seed);
    chol_ = cholesky_with_jitter(state_.covariance);
  }

  const ChainState& state() const noexcept { return state_; }

  StepResult step() {
    const Position xi = standard_normal_vector(state_.rng, state_.position.size());
    const double u = uniform01(state_.rng);
    return transition(xi, u);
  }

  StepResult transition(const Position& xi, double u) {
    const double nu = state_.stepsize;
    const Position proposal = state_.position + nu * (chol_.lower * xi);
    const double lp = target_->log_density(proposal);
    const auto [alpha, accept] = metropolis_decision(lp - state_.log_density, u);

    Position adapt_point;
    if (config_.variant == AdaptiveVariant::Rbam) {
      adapt_point = alpha * proposal + (1.0 - alpha) * state_.position;
    }
    if (accept) {
      state_.position = proposal;
      state_.log_density = lp;
    }
    if (config_.variant != AdaptiveVariant::Rbam) adapt_point = state_.position;

    const std::uint64_t t = state_.iteration;
    // GAM gains start at t + 1 so that the first update is not a full
    // replacement of Sigma by a rank-one matrix.
    const double eta =
        config_.variant == AdaptiveVariant::Gam ? rm_gain(t + 1, config_.rm_rate) : config_.gain;
    update_moments(state_.mean, state_.covariance, adapt_point, eta);
    if (config_.variant == AdaptiveVariant::Gam) {
      state_.stepsize = rm_stepsize_update(state_.stepsize, alpha, config_.target_accept, eta);
    }
    chol_ = cholesky_with_jitter(state_.covariance);

    const bool collected = t >= config_.burnin;
    ++state_.iteration;
    return {accept, alpha, collected ? Phase::Collected : Phase::Burnin, nu, collected};
  }

private:
  const T* target_;
  AdaptiveMetropolisConfig config_;
  ChainState state_;
  CholeskyFactor chol_;
};

}  // namespace ckam
