#pragma once

#include "ckam/diagnostics.hpp"
#include "ckam/harness/config.hpp"
#include "ckam/samplers/run.hpp"

#include <limits>
#include <string>
#include <vector>

namespace ckam::harness {

struct Checkpoint {
  double wall_clock_s = 0.0;
  std::uint64_t iteration = 0;
  std::size_t samples = 0;
  double sym_kl = 0.0;
  double ess = 0.0;
};

struct RunSummary {
  std::uint64_t iterations = 0;
  std::uint64_t accepted = 0;
  std::size_t sample_count = 0;
  double acceptance_rate = 0.0;
  double total_seconds = 0.0;
};

struct RunResult {
  std::vector<Position> samples;
  std::vector<TraceRecord> trace;
  std::vector<Checkpoint> checkpoints;
  RunSummary summary;
};

/// Sampler failure annotated with where it happened.
class RunError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  bool keep_trace = true;
};

/// Grid symmetric KL for 2-d targets, marginal-mean symmetric KL otherwise.
inline double convergence_metric(std::span<const Position> samples, const Target& target,
                                 const DiagConfig& diag) {
  if (target.dimension() == 2) {
    return grid_symmetric_kl(samples, target, diag.mesh, diag.smoothing);
  }
  return marginal_mean_symmetric_kl(samples, target, diag.bins, diag.smoothing);
}

/// ESS of the collected samples; a chain that never moved counts as one
/// effective sample.
inline double checkpoint_ess(std::span<const Position> samples) {
  try {
    return effective_sample_size(samples);
  } catch (const std::domain_error&) {
    return 1.0;
  }
}

namespace detail {

template <Sampler S>
RunResult run_configured(S& sampler, const ExperimentConfig& cfg, const Target& target,
                         const RunOptions& options) {
  RunClock clock(cfg.virtual_clock);
  RunResult result;
  std::uint64_t iteration = 0;

  auto take_checkpoint = [&](const RunOutput& out) {
    // checkpoints need enough samples for an autocorrelation estimate
    if (out.samples.size() < 10) return;
    clock.pause();
    const double seconds = clock.seconds();
    if (result.checkpoints.empty() || seconds > result.checkpoints.back().wall_clock_s) {
      result.checkpoints.push_back({seconds, iteration, out.samples.size(),
                                    convergence_metric(out.samples, target, cfg.diag),
                                    checkpoint_ess(out.samples)});
    }
    clock.resume();
  };

  const StepObserver observer = [&](const TraceRecord&, const StepResult&, RunOutput& out) {
    ++iteration;
    if (iteration % cfg.diag.checkpoint_every == 0) take_checkpoint(out);
  };

  RunOutput out;
  try {
    out = run_sampler(sampler, cfg.budget, clock, observer, options.keep_trace);
  } catch (const std::exception& e) {
    throw RunError("run error: " + to_string(cfg.sampler) + " on " + target.name() +
                   " (seed " + std::to_string(cfg.seed) + ", iteration " +
                   std::to_string(sampler.state().iteration) + "): " + e.what());
  }
  if (result.checkpoints.empty() || result.checkpoints.back().iteration != iteration) {
    take_checkpoint(out);
  }

  result.summary.iterations = iteration;
  result.summary.accepted = out.accepted;
  result.summary.sample_count = out.samples.size();
  result.summary.acceptance_rate =
      iteration == 0 ? 0.0 : static_cast<double>(out.accepted) / static_cast<double>(iteration);
  result.summary.total_seconds = clock.seconds();
  result.samples = std::move(out.samples);
  result.trace = std::move(out.trace);
  return result;
}

}  // namespace detail

/// Runs the configured sampler to budget with periodic diagnostics. The run
/// clock is paused while diagnostics are computed.
inline RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {}) {
  const Target target = cfg.make_target();
  switch (cfg.sampler) {
    case SamplerKind::Rw: {
      RandomWalk<Target> s(target, cfg.init, cfg.rw, cfg.seed);
      return detail::run_configured(s, cfg, target, options);
    }
    case SamplerKind::Am:
    case SamplerKind::Rbam:
    case SamplerKind::Gam: {
      AdaptiveMetropolis<Target> s(target, cfg.init, cfg.am, cfg.seed);
      return detail::run_configured(s, cfg, target, options);
    }
    case SamplerKind::Kam: {
      KernelAdaptiveMetropolis<Target> s(target, cfg.init, *cfg.kernel, cfg.ckam.kam, cfg.seed);
      return detail::run_configured(s, cfg, target, options);
    }
    case SamplerKind::Ckam: {
      CyclicalKam<Target> s(target, cfg.init, *cfg.kernel, cfg.ckam, cfg.seed);
      return detail::run_configured(s, cfg, target, options);
    }
  }
  throw RunError("run error: unknown sampler");
}

}  // namespace ckam::harness
