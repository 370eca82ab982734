#pragma once

#include "ckam/samplers/adaptive_metropolis.hpp"
#include "ckam/samplers/chain.hpp"
#include "ckam/samplers/ckam.hpp"
#include "ckam/samplers/kam.hpp"
#include "ckam/samplers/random_walk.hpp"

#include <concepts>
#include <functional>

namespace ckam {

template <typename S>
concept Sampler = requires(S s, const S& cs) {
  { s.step() } -> std::same_as<StepResult>;
  { cs.state() } -> std::convertible_to<const ChainState&>;
};

struct RunOutput {
  std::vector<Position> samples;
  std::vector<TraceRecord> trace;
  std::uint64_t accepted = 0;
};

/// Called after every iteration with the trace record and the run so far.
using StepObserver = std::function<void(const TraceRecord&, const StepResult&, RunOutput&)>;

inline bool budget_exhausted(const Budget& budget, std::uint64_t iterations, const RunClock& clock) {
  if (budget.has_iterations && iterations >= budget.max_iterations) return true;
  if (budget.has_seconds && clock.seconds() >= budget.max_seconds) return true;
  return !budget.has_iterations && !budget.has_seconds;
}

/// Steps the sampler until the budget is exhausted, collecting samples and
/// one trace record per iteration.
template <Sampler S>
RunOutput run_sampler(S& sampler, const Budget& budget, RunClock& clock,
                      const StepObserver& observer = {}, bool keep_trace = true) {
  RunOutput out;
  std::uint64_t iterations = 0;
  while (!budget_exhausted(budget, iterations, clock)) {
    const StepResult r = sampler.step();
    ++iterations;
    clock.tick();
    const ChainState& s = sampler.state();
    if (r.accepted) ++out.accepted;
    if (r.collected) out.samples.push_back(s.position);
    TraceRecord rec{s.iteration, clock.seconds(), s.position, r.phase, r.stepsize, r.accepted};
    if (observer) observer(rec, r, out);
    if (keep_trace) out.trace.push_back(std::move(rec));
  }
  return out;
}

/// Runs cKAM from theta0 for the given budget under a fresh clock.
template <LogDensityModel T>
RunOutput ckam_run(const Position& theta0, const T& target, const KernelSpec& kernel,
                   const CkamConfig& config, const Budget& budget, std::uint64_t seed,
                   bool virtual_clock = true) {
  CyclicalKam<T> sampler(target, theta0, kernel, config, seed);
  RunClock clock(virtual_clock);
  return run_sampler(sampler, budget, clock);
}

}  // namespace ckam
