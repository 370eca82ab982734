#pragma once

#include "ckam/linalg.hpp"
#include "ckam/types.hpp"

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <numbers>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ckam {

/// Anything with a dimension and an (unnormalized) log-density can be sampled.
template <typename T>
concept LogDensityModel = requires(const T& t, const Position& x) {
  { t.dimension() } -> std::convertible_to<Eigen::Index>;
  { t.log_density(x) } -> std::convertible_to<double>;
};

namespace detail {

inline double log_sum_exp(std::span<const double> terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - hi);
  return hi + std::log(acc);
}

inline double log_normal_1d(double x, double mean, double variance) {
  const double z = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + z * z / variance);
}

inline double normal_cdf_1d(double x, double mean, double variance) {
  return 0.5 * std::erfc(-(x - mean) / std::sqrt(2.0 * variance));
}

}  // namespace detail

/// One weighted Gaussian of an explicit mixture.
class GaussianComponent {
public:
  GaussianComponent(Position mean, Matrix covariance, double weight)
      : mean_(std::move(mean)), covariance_(std::move(covariance)), weight_(weight) {
    if (covariance_.rows() != mean_.size() || covariance_.cols() != mean_.size()) {
      throw std::invalid_argument("GaussianComponent: covariance does not match mean dimension");
    }
    if (!(weight_ > 0.0 && weight_ <= 1.0)) {
      throw std::invalid_argument("GaussianComponent: weight must lie in (0, 1]");
    }
    Eigen::LLT<Matrix> llt(covariance_);
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("GaussianComponent: covariance is not positive definite");
    }
    chol_ = CholeskyFactor{llt.matrixL(), 0.0};
  }

  const Position& mean() const noexcept { return mean_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  double weight() const noexcept { return weight_; }
  const CholeskyFactor& cholesky() const noexcept { return chol_; }

  double log_weighted_density(const Position& x) const {
    return std::log(weight_) + mvn_log_pdf(x, mean_, chol_);
  }

private:
  Position mean_;
  Matrix covariance_;
  double weight_;
  CholeskyFactor chol_;
};

struct ExplicitMixture {
  std::vector<GaussianComponent> components;
};

/// Equal-weight mixture over the Cartesian grid means^d with covariance
/// variance * I. Evaluated per dimension, never by enumerating components.
struct ProductGrid {
  std::vector<double> means;
  double variance;
};

/// Rectangular 2-d mesh; cell (i, j) covers x0 in bin i and x1 in bin j.
struct GridMesh {
  double x_min, x_max, y_min, y_max;
  int nx, ny;

  void validate() const {
    if (nx <= 0 || ny <= 0) throw std::invalid_argument("GridMesh: resolution must be positive");
    if (!(x_max > x_min) || !(y_max > y_min)) {
      throw std::invalid_argument("GridMesh: bounds must satisfy min < max");
    }
  }
  double dx() const { return (x_max - x_min) / nx; }
  double dy() const { return (y_max - y_min) / ny; }
  double x_center(int i) const { return x_min + (i + 0.5) * dx(); }
  double y_center(int j) const { return y_min + (j + 0.5) * dy(); }
};

/// A benchmark density with analytic one-dimensional marginals.
class Target {
public:
  using Form = std::variant<ExplicitMixture, ProductGrid>;

  static Target explicit_mixture(std::string name, std::vector<GaussianComponent> components) {
    if (components.empty()) throw std::invalid_argument("Target: mixture has no components");
    const Eigen::Index d = components.front().mean().size();
    double total = 0.0;
    for (const auto& c : components) {
      if (c.mean().size() != d) {
        throw std::invalid_argument("Target: mixture components differ in dimension");
      }
      total += c.weight();
    }
    if (std::abs(total - 1.0) > 1e-12) {
      throw std::invalid_argument("Target: mixture weights must sum to 1");
    }
    return Target(std::move(name), d, ExplicitMixture{std::move(components)});
  }

  static Target product_grid(std::string name, Eigen::Index dimension, std::vector<double> means,
                             double variance) {
    if (dimension < 1) throw std::invalid_argument("Target: dimension must be positive");
    if (means.empty()) throw std::invalid_argument("Target: product grid needs at least one mean");
    if (!(variance > 0.0)) throw std::invalid_argument("Target: variance must be positive");
    return Target(std::move(name), dimension, ProductGrid{std::move(means), variance});
  }

  /// 1/2 N([-8,0], 0.5 I) + 1/2 N([8,0], 2 I).
  static Target bimodal2d() {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(Position{{-8.0, 0.0}}, 0.5 * Matrix::Identity(2, 2), 0.5);
    comps.emplace_back(Position{{8.0, 0.0}}, 2.0 * Matrix::Identity(2, 2), 0.5);
    return explicit_mixture("bimodal2d", std::move(comps));
  }

  /// (1/5) sum_i N(2.5 (i-1) [1,1], sqrt(i) I), i = 1..5.
  static Target mixture5_2d() {
    std::vector<GaussianComponent> comps;
    for (int i = 1; i <= 5; ++i) {
      const double c = 2.5 * (i - 1);
      comps.emplace_back(Position{{c, c}}, std::sqrt(static_cast<double>(i)) * Matrix::Identity(2, 2),
                         0.2);
    }
    return explicit_mixture("mixture5_2d", std::move(comps));
  }

  /// Means {-30,-15,0,15,30} per axis, covariance 15 I.
  static Target grid5(Eigen::Index dimension) {
    return product_grid("grid5_highd", dimension, {-30.0, -15.0, 0.0, 15.0, 30.0}, 15.0);
  }

  static Target standard_normal(Eigen::Index dimension = 1) {
    std::vector<GaussianComponent> comps;
    comps.emplace_back(Position::Zero(dimension), Matrix::Identity(dimension, dimension), 1.0);
    return explicit_mixture("normal", std::move(comps));
  }

  const std::string& name() const noexcept { return name_; }
  Eigen::Index dimension() const noexcept { return dimension_; }
  const Form& form() const noexcept { return form_; }

  /// Normalized log-density, via log-sum-exp.
  double log_density(const Position& theta) const {
    if (theta.size() != dimension_) {
      throw std::invalid_argument("log_density: expected dimension " + std::to_string(dimension_) +
                                  ", got " + std::to_string(theta.size()));
    }
    require_finite(theta, "log_density");
    if (const auto* mix = std::get_if<ExplicitMixture>(&form_)) {
      thread_local std::vector<double> terms;
      terms.resize(mix->components.size());
      for (std::size_t i = 0; i < terms.size(); ++i) {
        terms[i] = mix->components[i].log_weighted_density(theta);
      }
      return detail::log_sum_exp(terms);
    }
    const auto& grid = std::get<ProductGrid>(form_);
    double total = 0.0;
    for (Eigen::Index k = 0; k < dimension_; ++k) total += grid_log_marginal(grid, theta(k));
    return total;
  }

  double marginal_density_1d(Eigen::Index dim, double x) const {
    check_dim(dim);
    if (const auto* mix = std::get_if<ExplicitMixture>(&form_)) {
      double acc = 0.0;
      for (const auto& c : mix->components) {
        acc += c.weight() *
               std::exp(detail::log_normal_1d(x, c.mean()(dim), c.covariance()(dim, dim)));
      }
      return acc;
    }
    return std::exp(grid_log_marginal(std::get<ProductGrid>(form_), x));
  }

  double marginal_cdf_1d(Eigen::Index dim, double x) const {
    check_dim(dim);
    double acc = 0.0;
    if (const auto* mix = std::get_if<ExplicitMixture>(&form_)) {
      for (const auto& c : mix->components) {
        acc += c.weight() * detail::normal_cdf_1d(x, c.mean()(dim), c.covariance()(dim, dim));
      }
      return acc;
    }
    const auto& grid = std::get<ProductGrid>(form_);
    for (double m : grid.means) acc += detail::normal_cdf_1d(x, m, grid.variance);
    return acc / static_cast<double>(grid.means.size());
  }

  /// [min mean - 3 sigma_max, max mean + 3 sigma_max] of the dim-th marginal.
  std::pair<double, double> marginal_range(Eigen::Index dim) const {
    check_dim(dim);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sigma = 0.0;
    if (const auto* mix = std::get_if<ExplicitMixture>(&form_)) {
      for (const auto& c : mix->components) {
        lo = std::min(lo, c.mean()(dim));
        hi = std::max(hi, c.mean()(dim));
        sigma = std::max(sigma, std::sqrt(c.covariance()(dim, dim)));
      }
    } else {
      const auto& grid = std::get<ProductGrid>(form_);
      lo = *std::min_element(grid.means.begin(), grid.means.end());
      hi = *std::max_element(grid.means.begin(), grid.means.end());
      sigma = std::sqrt(grid.variance);
    }
    return {lo - 3.0 * sigma, hi + 3.0 * sigma};
  }

private:
  Target(std::string name, Eigen::Index d, Form form)
      : name_(std::move(name)), dimension_(d), form_(std::move(form)) {}

  void check_dim(Eigen::Index dim) const {
    if (dim < 0 || dim >= dimension_) {
      throw std::out_of_range("marginal: dimension index " + std::to_string(dim) +
                              " out of range for a " + std::to_string(dimension_) +
                              "-dimensional target");
    }
  }

  static double grid_log_marginal(const ProductGrid& grid, double x) {
    thread_local std::vector<double> terms;
    terms.resize(grid.means.size());
    const double log_w = -std::log(static_cast<double>(grid.means.size()));
    for (std::size_t j = 0; j < terms.size(); ++j) {
      terms[j] = log_w + detail::log_normal_1d(x, grid.means[j], grid.variance);
    }
    return detail::log_sum_exp(terms);
  }

  std::string name_;
  Eigen::Index dimension_;
  Form form_;
};

/// Cell probabilities of a 2-d log-density on a mesh: density at cell centers
/// times cell area, renormalized to sum to one.
template <typename LogDensityFn>
  requires std::invocable<LogDensityFn&, const Position&>
Matrix grid_density(LogDensityFn&& log_density, const GridMesh& mesh) {
  mesh.validate();
  Matrix logs(mesh.nx, mesh.ny);
  Position point(2);
  for (int i = 0; i < mesh.nx; ++i) {
    for (int j = 0; j < mesh.ny; ++j) {
      point << mesh.x_center(i), mesh.y_center(j);
      logs(i, j) = log_density(point);
    }
  }
  const double hi = logs.maxCoeff();
  if (!std::isfinite(hi)) throw NumericalError("grid_density: density vanishes on the mesh");
  Matrix mass = (logs.array() - hi).exp().matrix() * (mesh.dx() * mesh.dy());
  return mass / mass.sum();
}

inline Matrix grid_density(const Target& target, const GridMesh& mesh) {
  if (target.dimension() != 2) {
    throw std::invalid_argument("grid_density: only 2-d targets are supported (got dimension " +
                                std::to_string(target.dimension()) + ")");
  }
  return grid_density([&](const Position& x) { return target.log_density(x); }, mesh);
}

}  // namespace ckam
