#pragma once

#include "ckam/kernels.hpp"
#include "ckam/linalg.hpp"
#include "ckam/samplers/chain.hpp"
#include "ckam/schedules.hpp"
#include "ckam/targets.hpp"

#include <algorithm>
#include <span>

namespace ckam {

struct NoiseScheduleParams {
  double a = 0.2;
  double b = 1.0;
  double decay_rate = 0.0;

  double at(std::uint64_t t) const { return noise_schedule(a, b, decay_rate, t); }
};

struct KamConfig {
  double stepsize = 1.0;  // initial nu
  double rm_rate = 0.75;  // eta_t = (1 + t)^(-rm_rate)
  double target_accept = 0.234;
  std::size_t subsample_size = 30;
  double adapt_prob = 0.5;  // p_t, probability of refreshing the subsample
  NoiseScheduleParams noise;
  std::uint64_t burnin = 0;

  void validate() const {
    if (!(stepsize > 0.0)) throw std::invalid_argument("kam: stepsize must be positive");
    if (subsample_size < 1) throw std::invalid_argument("kam: subsample size must be positive");
    if (!(adapt_prob >= 0.0 && adapt_prob <= 1.0)) {
      throw std::invalid_argument("kam: adaptation probability must lie in [0, 1]");
    }
    if (!(noise.a >= 0.0) || !(noise.decay_rate >= 0.0) || !(noise.b > 0.0)) {
      throw std::invalid_argument("kam: noise schedule needs a >= 0, b > 0, decay_rate >= 0");
    }
  }
};

/// Floyd's algorithm: k distinct indices drawn uniformly from [0, n).
template <typename R>
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, R& rng) {
  if (k > n) throw std::invalid_argument("sample_without_replacement: k exceeds n");
  std::vector<std::size_t> chosen;
  chosen.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = std::uniform_int_distribution<std::size_t>(0, j)(rng);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  return chosen;
}

/// Covariance of the KAM proposal centred at theta for subsample z.
inline Matrix kam_proposal_covariance(const KernelSpec& kernel, const Position& theta,
                                      std::span<const Position> subsample, double gamma,
                                      double nu) {
  return kam_covariance(gamma, nu, kernel_gradient_matrix(kernel, theta, subsample));
}

/// log q_z(to | from): density of the KAM proposal from `from`.
inline double kam_log_proposal_density(const KernelSpec& kernel,
                                       std::span<const Position> subsample, double gamma,
                                       double nu, const Position& from, const Position& to) {
  const auto chol =
      cholesky_with_jitter(kam_proposal_covariance(kernel, from, subsample, gamma, nu));
  return mvn_log_pdf(to, from, chol);
}

/// log [pi(theta') q_z(theta | theta')] - log [pi(theta) q_z(theta' | theta)].
inline double kam_log_ratio(const KernelSpec& kernel, std::span<const Position> subsample,
                            double gamma, double nu, const Position& theta, double lp_theta,
                            const Position& proposal, double lp_proposal) {
  return lp_proposal - lp_theta +
         kam_log_proposal_density(kernel, subsample, gamma, nu, proposal, theta) -
         kam_log_proposal_density(kernel, subsample, gamma, nu, theta, proposal);
}

namespace detail {

/// Refreshes state.subsample from state.history (forced when empty): the
/// subsample holds min(m, |history|) distinct history points.
inline void refresh_subsample(ChainState& state, std::size_t m) {
  const std::size_t size = std::min(m, state.history.size());
  const auto picks = sample_without_replacement(state.history.size(), size, state.rng);
  state.subsample.clear();
  state.subsample_iterations.clear();
  for (std::size_t idx : picks) {
    state.subsample.push_back(state.history[idx]);
    state.subsample_iterations.push_back(state.history_origin + idx);
  }
}

/// One KAM iteration on `state`. `adapt_index` drives the noise schedule and
/// the Robbins-Monro gain; the new position is appended to state.history.
template <LogDensityModel T>
StepResult kam_iteration(ChainState& state, const T& target, const KernelSpec& kernel,
                         const KamConfig& config, std::uint64_t adapt_index) {
  const double gamma = config.noise.at(adapt_index);
  state.noise = gamma;
  const double nu = state.stepsize;

  const bool refresh = uniform01(state.rng) < config.adapt_prob;
  if (refresh || state.subsample.empty()) refresh_subsample(state, config.subsample_size);

  const auto forward = cholesky_with_jitter(
      kam_proposal_covariance(kernel, state.position, state.subsample, gamma, nu));
  const Position xi = standard_normal_vector(state.rng, state.position.size());
  const Position proposal = state.position + forward.lower * xi;
  const double lp = target.log_density(proposal);

  const auto reverse = cholesky_with_jitter(
      kam_proposal_covariance(kernel, proposal, state.subsample, gamma, nu));
  const double log_ratio = lp - state.log_density + mvn_log_pdf(state.position, proposal, reverse) -
                           mvn_log_pdf(proposal, state.position, forward);
  const auto [alpha, accept] = metropolis_decision(log_ratio, uniform01(state.rng));
  if (accept) {
    state.position = proposal;
    state.log_density = lp;
  }
  state.stepsize = rm_stepsize_update(nu, alpha, config.target_accept,
                                      rm_gain(adapt_index, config.rm_rate));
  state.history.push_back(state.position);
  return {accept, alpha, Phase::Exploration, nu, false};
}

}  // namespace detail

/// Kernel Adaptive Metropolis-Hastings with stepsize adaptation toward alpha*.
template <LogDensityModel T>
class KernelAdaptiveMetropolis {
public:
  KernelAdaptiveMetropolis(const T& target, Position theta0, KernelSpec kernel, KamConfig config,
                           std::uint64_t seed)
      : target_(&target), kernel_(std::move(kernel)), config_(config) {
    config.validate();
    if (theta0.size() != target.dimension()) {
      throw std::invalid_argument("kam: initial position has the wrong dimension");
    }
    state_.log_density = target.log_density(theta0);
    state_.position = std::move(theta0);
    state_.stepsize = config.stepsize;
    state_.noise = config.noise.at(0);
    state_.history.push_back(state_.position);
    state_.rng.seed(seed);
  }

  const ChainState& state() const noexcept { return state_; }
  const KernelSpec& kernel() const noexcept { return kernel_; }

  StepResult step() {
    const std::uint64_t t = state_.iteration;
    StepResult result = detail::kam_iteration(state_, *target_, kernel_, config_, t);
    result.collected = t >= config_.burnin;
    result.phase = result.collected ? Phase::Collected : Phase::Burnin;
    ++state_.iteration;
    return result;
  }

private:
  const T* target_;
  KernelSpec kernel_;
  KamConfig config_;
  ChainState state_;
};

}  // namespace ckam
