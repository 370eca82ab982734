#include <ckam/kernels.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using ckam::KernelSpec;
using ckam::Matrix;
using ckam::Position;

namespace {

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<KernelSpec> all_kernels() {
  return {KernelSpec::linear(), KernelSpec::rbf(1.3), KernelSpec::matern(4.0, 2.0)};
}

}  // namespace

TEST(Bessel, MatchesQuadratureForIntegerAndHalfIntegerOrders) {
  for (double v : {0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 3.5, 4.0, 6.0}) {
    for (double x : {0.05, 0.3, 1.0, 1.4142135623730951, 2.5, 7.0, 20.0}) {
      EXPECT_LT(rel_err(ckam::bessel_k(v, x), ckam::test::bessel_k_quadrature(v, x)), 1e-10)
          << "v=" << v << " x=" << x;
    }
  }
}

TEST(Bessel, RejectsUnsupportedOrdersAndArguments) {
  EXPECT_THROW(ckam::bessel_k(0.3, 1.0), ckam::NumericalError);
  EXPECT_THROW(ckam::bessel_k(2.0, 0.0), ckam::NumericalError);
  EXPECT_THROW(ckam::bessel_k(2.0, -1.0), ckam::NumericalError);
}

TEST(KernelSpec, ValidatesParameters) {
  EXPECT_THROW(KernelSpec::rbf(0.0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::matern(4.0, -1.0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::matern(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(KernelSpec::matern(2.7, 1.0), std::invalid_argument);
  EXPECT_NO_THROW(KernelSpec::matern(2.5, 1.0));
}

TEST(KernelEval, LinearIsDotProduct) {
  EXPECT_DOUBLE_EQ(ckam::kernel_eval(KernelSpec::linear(), Position{{1, 2}}, Position{{3, 4}}), 11.0);
}

TEST(KernelEval, StationaryKernelsAreOneAtZeroDistance) {
  const Position x{{0.3, -1.2}};
  EXPECT_EQ(ckam::kernel_eval(KernelSpec::rbf(0.7), x, x), 1.0);
  EXPECT_EQ(ckam::kernel_eval(KernelSpec::matern(4.0, 2.0), x, x), 1.0);
  EXPECT_EQ(ckam::kernel_eval(KernelSpec::matern(0.5, 1.0), x, x), 1.0);
  // below the distance floor
  Position y = x;
  y(0) += 1e-13;
  EXPECT_EQ(ckam::kernel_eval(KernelSpec::matern(4.0, 2.0), x, y), 1.0);
}

TEST(KernelEval, MaternHalfOrderIsExponential) {
  const auto k = KernelSpec::matern(0.5, 1.0);
  for (double r : {0.5, 1.0, 2.0}) {
    const double got = ckam::kernel_eval(k, Position{{0.0, 0.0}}, Position{{r, 0.0}});
    EXPECT_LT(rel_err(got, std::exp(-r)), 1e-12);
    EXPECT_LT(rel_err(got, ckam::test::matern_quadrature(0.5, 1.0, r)), 1e-8);
  }
}

TEST(KernelEval, MaternOrderFourMatchesQuadratureOracle) {
  // Frozen from the trapezoid oracle and an independent 30-digit evaluation.
  constexpr double kMaternV4L2R1 = 0.85152742646290264;
  const auto k = KernelSpec::matern(4.0, 2.0);
  const double got = ckam::kernel_eval(k, Position{{0.0, 0.0}}, Position{{0.6, 0.8}});
  EXPECT_LT(rel_err(got, kMaternV4L2R1), 1e-8);
  EXPECT_LT(rel_err(got, ckam::test::matern_quadrature(4.0, 2.0, 1.0)), 1e-8);
}

TEST(KernelEval, MaternHalfIntegerMatchesClosedForm) {
  for (int p : {0, 1, 2, 3}) {
    const auto k = KernelSpec::matern(p + 0.5, 1.7);
    for (int i = 1; i <= 20; ++i) {
      const double r = 0.15 * i;
      const double got = ckam::kernel_eval(k, Position{{r}}, Position{{0.0}});
      EXPECT_LT(rel_err(got, ckam::test::matern_half_integer_closed_form(p, 1.7, r)), 1e-8)
          << "p=" << p << " r=" << r;
    }
  }
}

TEST(KernelEval, RejectsMismatchedOrNonFiniteInput) {
  const auto k = KernelSpec::rbf(1.0);
  EXPECT_THROW(ckam::kernel_eval(k, Position{{1, 2}}, Position{{1, 2, 3}}), std::invalid_argument);
  EXPECT_THROW(ckam::kernel_eval(k, Position{{1, NAN}}, Position{{1, 2}}), std::invalid_argument);
  EXPECT_THROW(ckam::kernel_gradient(k, Position{{1, 2}}, Position{{INFINITY, 2}}),
               std::invalid_argument);
}

TEST(KernelEval, SymmetricAndBoundedOnRandomPairs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& k : all_kernels()) {
    for (int trial = 0; trial < 100; ++trial) {
      Position a(3), b(3);
      for (int i = 0; i < 3; ++i) { a(i) = u(rng); b(i) = u(rng); }
      const double kab = ckam::kernel_eval(k, a, b);
      EXPECT_DOUBLE_EQ(kab, ckam::kernel_eval(k, b, a));
      if (k.name() != "linear") {
        EXPECT_GT(kab, 0.0);
        EXPECT_LT(kab, 1.0);
      }
    }
  }
}

TEST(KernelGradient, ClosedFormCases) {
  const Position z{{3, 4}};
  const Position g = ckam::kernel_gradient(KernelSpec::linear(), Position{{-1, 7}}, z);
  EXPECT_EQ(g, z);
  const Position x{{0.2, 0.1}};
  EXPECT_EQ(ckam::kernel_gradient(KernelSpec::rbf(1.0), x, x), Position::Zero(2));
  EXPECT_EQ(ckam::kernel_gradient(KernelSpec::matern(4.0, 2.0), x, x), Position::Zero(2));
}

TEST(KernelGradient, RbfAgreesWithFiniteDifferences) {
  const auto k = KernelSpec::rbf(1.0);
  const Position theta{{0, 0}};
  const Position z{{1, 0}};
  const Position fd = ckam::test::finite_difference_gradient(
      [&](const Eigen::VectorXd& t) { return ckam::kernel_eval(k, t, z); }, theta);
  const Position g = ckam::kernel_gradient(k, theta, z);
  EXPECT_LT((g - fd).norm() / g.norm(), 1e-6);
}

TEST(KernelGradient, MatchesFiniteDifferencesOnRandomPairs) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<KernelSpec> kernels = all_kernels();
  kernels.push_back(KernelSpec::matern(1.5, 0.8));
  for (const auto& k : kernels) {
    int checked = 0;
    while (checked < 100) {
      Position theta(3), z(3);
      for (int i = 0; i < 3; ++i) { theta(i) = u(rng); z(i) = u(rng); }
      if ((theta - z).norm() < 0.1) continue;
      const Position fd = ckam::test::finite_difference_gradient(
          [&](const Eigen::VectorXd& t) { return ckam::kernel_eval(k, t, z); }, theta);
      const Position g = ckam::kernel_gradient(k, theta, z);
      EXPECT_LT((g - fd).norm() / g.norm(), 1e-5) << k.name();
      ++checked;
    }
  }
}

TEST(KernelGradient, MaternNeedsOrderAboveOne) {
  EXPECT_THROW(ckam::kernel_gradient(KernelSpec::matern(1.0, 1.0), Position{{0.0}}, Position{{1.0}}),
               ckam::NumericalError);
  EXPECT_THROW(ckam::kernel_gradient(KernelSpec::matern(0.5, 1.0), Position{{0.0}}, Position{{1.0}}),
               ckam::NumericalError);
}

TEST(KernelGradientMatrix, ColumnsAreDoubledGradients) {
  const Position theta{{0.5, -0.25}};
  const std::vector<Position> single{Position{{3, 4}}};
  const Matrix m1 = ckam::kernel_gradient_matrix(KernelSpec::linear(), theta, single);
  EXPECT_EQ(m1.cols(), 1);
  EXPECT_EQ(Position(m1.col(0)), Position({{6, 8}}));

  const auto rbf = KernelSpec::rbf(0.9);
  const std::vector<Position> subsample{Position{{1.0, 0.0}}, theta, Position{{-0.3, 2.0}}};
  const Matrix m3 = ckam::kernel_gradient_matrix(rbf, theta, subsample);
  ASSERT_EQ(m3.rows(), 2);
  ASSERT_EQ(m3.cols(), 3);
  EXPECT_EQ(Position(m3.col(1)), Position::Zero(2));
  for (int i = 0; i < 3; ++i) {
    EXPECT_LT((Position(m3.col(i)) - 2.0 * ckam::kernel_gradient(rbf, theta, subsample[i])).norm(),
              1e-15);
  }
  EXPECT_THROW(ckam::kernel_gradient_matrix(rbf, theta, std::vector<Position>{}),
               std::invalid_argument);
}

TEST(CenteringMatrix, IsSymmetricIdempotentWithZeroRowSums) {
  for (Eigen::Index m = 1; m <= 12; ++m) {
    const Matrix h = ckam::centering_matrix(m);
    EXPECT_LT((h - h.transpose()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_LT((h * h - h).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((h * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff(), 1e-14);
  }
  EXPECT_EQ(ckam::centering_matrix(1), Matrix::Zero(1, 1));
}

TEST(ProposalCovariance, KernelTermVanishesWhenNuIsZero) {
  const Matrix grads = Matrix::Random(2, 3);
  const Matrix c = ckam::proposal_covariance(0.2, 0.0, grads, ckam::centering_matrix(3));
  EXPECT_LT((c - 0.04 * Matrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ProposalCovariance, MatchesTripleLoopProduct) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix grads(2, 3);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) grads(i, j) = n(rng);
  const Matrix h = ckam::centering_matrix(3);
  const double gamma = 0.3, nu = 1.7;
  Matrix expected = Matrix::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) acc += grads(a, i) * h(i, j) * grads(b, j);
      expected(a, b) = nu * nu * acc + (a == b ? gamma * gamma : 0.0);
    }
  const Matrix got = ckam::proposal_covariance(gamma, nu, grads, h);
  EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((ckam::kam_covariance(gamma, nu, grads) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProposalCovariance, SymmetricWithEigenvaluesAboveGammaSquared) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const auto k = KernelSpec::matern(4.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    Position theta(3);
    for (int i = 0; i < 3; ++i) theta(i) = u(rng);
    std::vector<Position> z(7, Position(3));
    for (auto& p : z)
      for (int i = 0; i < 3; ++i) p(i) = u(rng);
    const double gamma = 0.2;
    const Matrix c = ckam::proposal_covariance(gamma, 1.5, ckam::kernel_gradient_matrix(k, theta, z),
                                               ckam::centering_matrix(7));
    EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
    EXPECT_GE(eig.eigenvalues().minCoeff(), gamma * gamma * (1 - 1e-12));
    EXPECT_EQ(Eigen::LLT<Matrix>(c).info(), Eigen::Success);
  }
}

TEST(ProposalCovariance, RejectsDegenerateInput) {
  const Matrix grads = Matrix::Random(2, 3);
  EXPECT_THROW(ckam::proposal_covariance(0.0, 0.0, grads, ckam::centering_matrix(3)),
               ckam::NumericalError);
  EXPECT_THROW(ckam::proposal_covariance(0.1, 1.0, grads, ckam::centering_matrix(2)),
               std::invalid_argument);
}
