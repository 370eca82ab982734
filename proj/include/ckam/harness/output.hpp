#pragma once

#include "ckam/harness/experiment.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace ckam::harness {

/// Shortest-safe decimal form: 17 significant digits round-trips any double.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class OutputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("output error: cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw OutputError("output error: write to '" + path.string() + "' failed");
}

}  // namespace detail

inline void write_trace_csv(const std::filesystem::path& path, std::span<const TraceRecord> trace,
                            Eigen::Index dimension) {
  auto out = detail::open_output(path);
  out << "iter,wall_clock_s,phase,stepsize,accepted";
  for (Eigen::Index i = 0; i < dimension; ++i) out << ",x" << i;
  out << '\n';
  for (const auto& r : trace) {
    out << r.iteration << ',' << format_real(r.wall_clock_s) << ',' << to_string(r.phase) << ','
        << format_real(r.stepsize) << ',' << (r.accepted ? 1 : 0);
    for (Eigen::Index i = 0; i < r.position.size(); ++i) out << ',' << format_real(r.position(i));
    out << '\n';
  }
  detail::finish(out, path);
}

inline void write_checkpoints_csv(const std::filesystem::path& path,
                                  std::span<const Checkpoint> checkpoints) {
  auto out = detail::open_output(path);
  out << "wall_clock_s,sym_kl,ess\n";
  for (const auto& c : checkpoints) {
    out << format_real(c.wall_clock_s) << ',' << format_real(c.sym_kl) << ',' << format_real(c.ess)
        << '\n';
  }
  detail::finish(out, path);
}

/// Config echo plus final summary. nlohmann::json objects keep keys sorted.
inline nlohmann::json summary_json(const ExperimentConfig& cfg, const RunResult& result) {
  nlohmann::json config = nlohmann::json::object();
  for (const auto& [k, v] : cfg.entries) config[k] = v;
  config["run.seed"] = std::to_string(cfg.seed);

  nlohmann::json j;
  j["config"] = config;
  j["sampler"] = to_string(cfg.sampler);
  j["target"] = cfg.target_name;
  j["dimension"] = cfg.dimension;
  j["seed"] = cfg.seed;
  j["iterations"] = result.summary.iterations;
  j["accepted"] = result.summary.accepted;
  j["acceptance_rate"] = result.summary.acceptance_rate;
  j["sample_count"] = result.summary.sample_count;
  j["total_seconds"] = result.summary.total_seconds;
  j["virtual_clock"] = cfg.virtual_clock;
  j["checkpoint_count"] = result.checkpoints.size();
  if (result.checkpoints.empty()) {
    j["final_sym_kl"] = nullptr;
    j["final_ess"] = nullptr;
  } else {
    j["final_sym_kl"] = result.checkpoints.back().sym_kl;
    j["final_ess"] = result.checkpoints.back().ess;
  }
  return j;
}

inline void write_summary_json(const std::filesystem::path& path, const ExperimentConfig& cfg,
                               const RunResult& result) {
  auto out = detail::open_output(path);
  out << summary_json(cfg, result).dump(2) << '\n';
  detail::finish(out, path);
}

/// Writes trace.csv, checkpoints.csv and summary.json into dir (created if
/// needed).
inline void emit_outputs(const std::filesystem::path& dir, const ExperimentConfig& cfg,
                         const RunResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw OutputError("output error: cannot create '" + dir.string() + "': " + ec.message());
  write_trace_csv(dir / "trace.csv", result.trace, cfg.dimension);
  write_checkpoints_csv(dir / "checkpoints.csv", result.checkpoints);
  write_summary_json(dir / "summary.json", cfg, result);
}

}  // namespace ckam::harness
