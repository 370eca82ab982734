#pragma once

#include "ckam/types.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <numbers>
#include <random>

namespace ckam {

/// Lower Cholesky factor of a covariance, with the jitter that was needed to
/// obtain it.
struct CholeskyFactor {
  Matrix lower;
  double jitter = 0.0;

  Eigen::Index dimension() const { return lower.rows(); }

  double log_determinant() const {
    return 2.0 * lower.diagonal().array().log().sum();
  }
};

inline constexpr double kJitterBase = 1e-9;
inline constexpr int kJitterEscalations = 3;

/// Factorizes cov, adding kJitterBase * mean(diag) to the diagonal on failure
/// and escalating x10 up to kJitterEscalations times before giving up.
inline CholeskyFactor cholesky_with_jitter(const Matrix& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) {
    throw std::invalid_argument("cholesky_with_jitter: covariance must be square and non-empty");
  }
  if (!cov.allFinite()) {
    throw NumericalError("cholesky_with_jitter: covariance has non-finite entries");
  }
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() == Eigen::Success) return {llt.matrixL(), 0.0};

  const double mean_diag = cov.diagonal().mean();
  double jitter = kJitterBase * (mean_diag > 0.0 ? mean_diag : 1.0);
  for (int attempt = 0; attempt <= kJitterEscalations; ++attempt, jitter *= 10.0) {
    Matrix padded = cov;
    padded.diagonal().array() += jitter;
    llt.compute(padded);
    if (llt.info() == Eigen::Success) return {llt.matrixL(), jitter};
  }
  throw NumericalError("cholesky_with_jitter: covariance not positive definite after jitter");
}

/// log N(x | mean, L L^T).
inline double mvn_log_pdf(const Position& x, const Position& mean, const CholeskyFactor& chol) {
  const Position diff = x - mean;
  const Position white = chol.lower.triangularView<Eigen::Lower>().solve(diff);
  const double d = static_cast<double>(x.size());
  return -0.5 * (d * std::log(2.0 * std::numbers::pi) + chol.log_determinant() +
                 white.squaredNorm());
}

template <typename Rng>
Position standard_normal_vector(Rng& rng, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Position xi(d);
  for (Eigen::Index i = 0; i < d; ++i) xi(i) = normal(rng);
  return xi;
}

template <typename Rng>
double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace ckam
