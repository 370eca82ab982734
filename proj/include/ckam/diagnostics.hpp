#pragma once

#include "ckam/targets.hpp"
#include "ckam/types.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace ckam {

inline constexpr double kDefaultSmoothing = 1e-10;

struct GridHistogram {
  GridMesh mesh;
  Matrix masses;  // nx x ny, sums to one
};

namespace detail {

inline int clamp_bin(double x, double lo, double width, int n) {
  const double pos = std::floor((x - lo) / width);
  if (!(pos >= 0.0)) return 0;  // also catches NaN
  if (pos >= n) return n - 1;
  return static_cast<int>(pos);
}

}  // namespace detail

/// Normalized 2-d histogram with smoothing_eps added per cell. Samples outside
/// the mesh land in the nearest edge cell.
inline GridHistogram histogram_2d(std::span<const Position> samples, const GridMesh& mesh,
                                  double smoothing_eps = kDefaultSmoothing) {
  mesh.validate();
  if (samples.empty()) throw std::invalid_argument("histogram_2d: no samples");
  if (!(smoothing_eps >= 0.0)) throw std::invalid_argument("histogram_2d: negative smoothing");
  Matrix counts = Matrix::Zero(mesh.nx, mesh.ny);
  for (const auto& s : samples) {
    if (s.size() != 2) throw std::invalid_argument("histogram_2d: samples must be 2-d");
    counts(detail::clamp_bin(s(0), mesh.x_min, mesh.dx(), mesh.nx),
           detail::clamp_bin(s(1), mesh.y_min, mesh.dy(), mesh.ny)) += 1.0;
  }
  counts.array() += smoothing_eps;
  return {mesh, counts / counts.sum()};
}

/// Normalized 1-d histogram of x over [lo, hi] with edge clamping.
inline Eigen::VectorXd histogram_1d(std::span<const double> xs, double lo, double hi, int bins,
                                    double smoothing_eps = kDefaultSmoothing) {
  if (bins <= 0 || !(hi > lo)) throw std::invalid_argument("histogram_1d: invalid bins");
  if (xs.empty()) throw std::invalid_argument("histogram_1d: no samples");
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
  const double width = (hi - lo) / bins;
  for (double x : xs) counts(detail::clamp_bin(x, lo, width, bins)) += 1.0;
  counts.array() += smoothing_eps;
  return counts / counts.sum();
}

/// KL(p || q) + KL(q || p) in nats. Both inputs must be strictly positive.
template <typename DerivedP, typename DerivedQ>
double symmetric_kl(const Eigen::DenseBase<DerivedP>& p, const Eigen::DenseBase<DerivedQ>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("symmetric_kl: support sizes differ");
  if (p.size() == 0) throw std::invalid_argument("symmetric_kl: empty support");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double a = p.derived().coeff(i);
    const double b = q.derived().coeff(i);
    if (!(a > 0.0) || !(b > 0.0)) {
      throw std::domain_error("symmetric_kl: zero cell (smooth the inputs first)");
    }
    acc += (a - b) * std::log(a / b);
  }
  return std::max(acc, 0.0);
}

/// Analytic marginal of `dim` discretized on the histogram bins: CDF mass per
/// bin, with the tails folded into the edge bins (matching edge clamping).
inline Eigen::VectorXd discretized_marginal(const Target& target, Eigen::Index dim, double lo,
                                            double hi, int bins,
                                            double smoothing_eps = kDefaultSmoothing) {
  Eigen::VectorXd mass(bins);
  const double width = (hi - lo) / bins;
  double prev = 0.0;
  for (int b = 0; b < bins; ++b) {
    const double edge = (b == bins - 1) ? 1.0 : target.marginal_cdf_1d(dim, lo + (b + 1) * width);
    mass(b) = std::max(edge - prev, 0.0);
    prev = edge;
  }
  mass.array() += smoothing_eps;
  return mass / mass.sum();
}

/// Symmetric KL between the empirical and analytic marginal of each
/// dimension, averaged over dimensions.
inline double marginal_mean_symmetric_kl(std::span<const Position> samples, const Target& target,
                                         int bins, double smoothing_eps = kDefaultSmoothing) {
  if (samples.empty()) throw std::invalid_argument("marginal_mean_symmetric_kl: no samples");
  const Eigen::Index d = target.dimension();
  std::vector<double> column(samples.size());
  double total = 0.0;
  for (Eigen::Index k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i](k);
    const auto [lo, hi] = target.marginal_range(k);
    const auto empirical = histogram_1d(column, lo, hi, bins, smoothing_eps);
    const auto analytic = discretized_marginal(target, k, lo, hi, bins, smoothing_eps);
    total += symmetric_kl(empirical, analytic);
  }
  return total / static_cast<double>(d);
}

/// Symmetric KL between a 2-d histogram of samples and the gridded target.
inline double grid_symmetric_kl(std::span<const Position> samples, const Target& target,
                                const GridMesh& mesh, double smoothing_eps = kDefaultSmoothing) {
  const auto hist = histogram_2d(samples, mesh, smoothing_eps);
  Matrix reference = grid_density(target, mesh);
  reference.array() += smoothing_eps;
  reference /= reference.sum();
  return symmetric_kl(hist.masses.reshaped(), reference.reshaped());
}

/// n / (1 + 2 sum_k rho_k) with Geyer's initial positive sequence truncation.
/// Autocorrelations are direct sums, computed lag by lag until the pair sums
/// turn non-positive or lag n/2 is reached. Clamped to n.
inline double effective_sample_size(std::span<const double> chain) {
  const std::size_t n = chain.size();
  if (n < 10) throw std::invalid_argument("effective_sample_size: need at least 10 samples");
  double mean = 0.0;
  for (double x : chain) mean += x;
  mean /= static_cast<double>(n);
  std::vector<double> centered(n);
  double c0 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    centered[i] = chain[i] - mean;
    c0 += centered[i] * centered[i];
  }
  if (!(c0 > 0.0) || c0 <= 1e-300 * static_cast<double>(n)) {
    throw std::domain_error("effective_sample_size: chain has zero variance");
  }
  auto rho = [&](std::size_t lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) acc += centered[i] * centered[i + lag];
    return acc / c0;
  };

  const std::size_t max_lag = n / 2;
  double tau = -1.0;
  for (std::size_t k = 0; 2 * k + 1 <= max_lag; ++k) {
    const double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
    if (!(pair > 0.0)) break;
    tau += 2.0 * pair;
  }
  if (!(tau > 0.0)) return static_cast<double>(n);
  return std::min(static_cast<double>(n), static_cast<double>(n) / tau);
}

/// Minimum per-dimension ESS.
inline double effective_sample_size(std::span<const Position> samples) {
  if (samples.empty()) throw std::invalid_argument("effective_sample_size: no samples");
  const Eigen::Index d = samples.front().size();
  std::vector<double> column(samples.size());
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < d; ++k) {
    for (std::size_t i = 0; i < samples.size(); ++i) column[i] = samples[i](k);
    best = std::min(best, effective_sample_size(std::span<const double>(column)));
  }
  return best;
}

}  // namespace ckam
