#pragma once

#include "ckam/bessel.hpp"
#include "ckam/types.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>

namespace ckam {

/// Distances below this are treated as exactly zero by the stationary kernels.
inline constexpr double kDistanceFloor = 1e-12;

struct LinearKernel {};

struct RbfKernel {
  double lengthscale;
};

struct MaternKernel {
  double order;
  double lengthscale;
};

/// Tagged kernel choice. Construct through the named factories, which
/// validate the parameters.
class KernelSpec {
public:
  using Variant = std::variant<LinearKernel, RbfKernel, MaternKernel>;

  static KernelSpec linear() { return KernelSpec(LinearKernel{}); }

  static KernelSpec rbf(double lengthscale) {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
      throw std::invalid_argument("rbf kernel: lengthscale must be positive");
    }
    return KernelSpec(RbfKernel{lengthscale});
  }

  static KernelSpec matern(double order, double lengthscale) {
    if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
      throw std::invalid_argument("matern kernel: lengthscale must be positive");
    }
    if (!(order > 0.0) || classify_bessel_order(order) == BesselOrderKind::Unsupported) {
      throw std::invalid_argument(
          "matern kernel: order must be a positive integer or half-integer");
    }
    return KernelSpec(MaternKernel{order, lengthscale});
  }

  const Variant& variant() const noexcept { return kernel_; }

  std::string name() const {
    return std::visit(
        [](const auto& k) -> std::string {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, LinearKernel>) return "linear";
          else if constexpr (std::is_same_v<K, RbfKernel>) return "rbf";
          else return "matern";
        },
        kernel_);
  }

private:
  explicit KernelSpec(Variant k) : kernel_(k) {}
  Variant kernel_;
};

namespace detail {

// x^v K_v(x) / (Gamma(v) 2^{v-1}); tends to 1 as x -> 0.
inline double matern_profile(double order, double scaled_distance) {
  if (scaled_distance < kDistanceFloor) return 1.0;
  const double log_norm = std::lgamma(order) + (order - 1.0) * std::numbers::ln2;
  const double k = bessel_k(order, scaled_distance);
  if (k == 0.0) return 0.0;
  return std::exp(order * std::log(scaled_distance) + std::log(k) - log_norm);
}

inline double matern_scale(const MaternKernel& k) {
  return std::sqrt(2.0 * k.order) / k.lengthscale;
}

}  // namespace detail

/// k(theta, z) for the given kernel.
inline double kernel_eval(const KernelSpec& kernel, const Position& theta, const Position& z) {
  require_same_dimension(theta, z, "kernel_eval");
  require_finite(theta, "kernel_eval");
  require_finite(z, "kernel_eval");
  return std::visit(
      [&](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearKernel>) {
          return theta.dot(z);
        } else if constexpr (std::is_same_v<K, RbfKernel>) {
          const double sq = (theta - z).squaredNorm();
          return std::exp(-sq / (2.0 * k.lengthscale * k.lengthscale));
        } else {
          const double r = (theta - z).norm();
          if (r < kDistanceFloor) return 1.0;
          return detail::matern_profile(k.order, detail::matern_scale(k) * r);
        }
      },
      kernel.variant());
}

/// Gradient of k(theta, z) with respect to theta.
///
/// For the Matern kernel the lower-order factor k_{v-1} is the order-(v-1)
/// profile evaluated at the order-v scaled distance sqrt(2v) r / l, which is
/// what d/dx [x^v K_v(x)] = -x^v K_{v-1}(x) yields. Requires v > 1.
inline Position kernel_gradient(const KernelSpec& kernel, const Position& theta,
                                const Position& z) {
  require_same_dimension(theta, z, "kernel_gradient");
  require_finite(theta, "kernel_gradient");
  require_finite(z, "kernel_gradient");
  return std::visit(
      [&](const auto& k) -> Position {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, LinearKernel>) {
          return z;
        } else if constexpr (std::is_same_v<K, RbfKernel>) {
          const double l2 = k.lengthscale * k.lengthscale;
          const double value = std::exp(-(theta - z).squaredNorm() / (2.0 * l2));
          return (value / l2) * (z - theta);
        } else {
          if (!(k.order > 1.0)) {
            throw NumericalError("matern kernel gradient: unsupported order " +
                                 std::to_string(k.order) + " (requires v > 1)");
          }
          const Position diff = z - theta;
          const double r = diff.norm();
          if (r < kDistanceFloor) return Position::Zero(theta.size());
          const double l2 = k.lengthscale * k.lengthscale;
          const double lower =
              detail::matern_profile(k.order - 1.0, detail::matern_scale(k) * r);
          return (k.order / (l2 * (k.order - 1.0)) * lower) * diff;
        }
      },
      kernel.variant());
}

/// d x m matrix whose i-th column is 2 * grad_theta k(theta, z_i).
inline Matrix kernel_gradient_matrix(const KernelSpec& kernel, const Position& theta,
                                     std::span<const Position> subsample) {
  if (subsample.empty()) {
    throw std::invalid_argument("kernel_gradient_matrix: empty subsample");
  }
  Matrix grads(theta.size(), static_cast<Eigen::Index>(subsample.size()));
  for (std::size_t i = 0; i < subsample.size(); ++i) {
    grads.col(static_cast<Eigen::Index>(i)) = 2.0 * kernel_gradient(kernel, theta, subsample[i]);
  }
  return grads;
}

/// H = I - (1/m) 1 1^T.
inline Matrix centering_matrix(Eigen::Index m) {
  if (m < 1) throw std::invalid_argument("centering_matrix: size must be positive");
  return Matrix::Identity(m, m) - Matrix::Constant(m, m, 1.0 / static_cast<double>(m));
}

/// gamma^2 I + nu^2 M H M^T.
inline Matrix proposal_covariance(double gamma, double nu, const Matrix& grads,
                                  const Matrix& centering) {
  if (!(gamma >= 0.0) || !(nu >= 0.0)) {
    throw std::invalid_argument("proposal_covariance: gamma and nu must be non-negative");
  }
  if (gamma == 0.0 && nu == 0.0) {
    throw NumericalError("proposal_covariance: degenerate covariance (gamma = nu = 0)");
  }
  if (centering.rows() != grads.cols() || centering.cols() != grads.cols()) {
    throw std::invalid_argument("proposal_covariance: centering matrix does not conform");
  }
  Matrix cov = (nu * nu) * (grads * centering * grads.transpose());
  cov.diagonal().array() += gamma * gamma;
  return 0.5 * (cov + cov.transpose());
}

/// Same value as proposal_covariance with H applied as row-centering of M,
/// exploiting H = H H^T.
inline Matrix kam_covariance(double gamma, double nu, const Matrix& grads) {
  if (gamma == 0.0 && nu == 0.0) {
    throw NumericalError("kam_covariance: degenerate covariance (gamma = nu = 0)");
  }
  const Matrix centered = grads.colwise() - grads.rowwise().mean();
  Matrix cov = (nu * nu) * (centered * centered.transpose());
  cov.diagonal().array() += gamma * gamma;
  return 0.5 * (cov + cov.transpose());
}

}  // namespace ckam
