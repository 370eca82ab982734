#include <ckam/diagnostics.hpp>

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

using ckam::GridMesh;
using ckam::Position;
using ckam::Target;

namespace {

// Independent arithmetic: (0.5-0.9) ln(0.5/0.9) + (0.5-0.1) ln(0.5/0.1)
// = 0.4 (ln 5 - ln 5 + ln 9).
constexpr double kTwoCellKl = 0.87888983093448780;

Eigen::VectorXd random_distribution(std::mt19937_64& rng, int k) {
  std::uniform_real_distribution<double> u(0.01, 1.0);
  Eigen::VectorXd p(k);
  for (int i = 0; i < k; ++i) p(i) = u(rng);
  return p / p.sum();
}

std::vector<double> ar1_chain(std::mt19937_64& rng, std::size_t n, double phi) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> x(n);
  x[0] = normal(rng) / std::sqrt(1.0 - phi * phi);
  for (std::size_t i = 1; i < n; ++i) x[i] = phi * x[i - 1] + normal(rng);
  return x;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(SymmetricKl, TwoCellHandComputedValue) {
  const Eigen::Vector2d p(0.5, 0.5), q(0.9, 0.1);
  EXPECT_NEAR(0.4 * std::log(9.0), kTwoCellKl, 1e-15);
  EXPECT_NEAR(ckam::symmetric_kl(p, q), kTwoCellKl, 1e-9);
  EXPECT_NEAR(ckam::symmetric_kl(q, p), kTwoCellKl, 1e-9);
  EXPECT_EQ(ckam::symmetric_kl(p, p), 0.0);
}

TEST(SymmetricKl, NonNegativeSymmetricAndPermutationInvariant) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::VectorXd p = random_distribution(rng, 12);
    const Eigen::VectorXd q = random_distribution(rng, 12);
    const double kl = ckam::symmetric_kl(p, q);
    EXPECT_GT(kl, 0.0);
    EXPECT_NEAR(kl, ckam::symmetric_kl(q, p), 1e-14);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::VectorXd pp(12), qq(12);
    for (int i = 0; i < 12; ++i) {
      pp(i) = p(perm[i]);
      qq(i) = q(perm[i]);
    }
    EXPECT_NEAR(ckam::symmetric_kl(pp, qq), kl, 1e-13);
  }
}

TEST(SymmetricKl, RejectsZeroCellsAndMismatchedSupports) {
  EXPECT_THROW(ckam::symmetric_kl(Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.5, 0.5)),
               std::domain_error);
  EXPECT_THROW(ckam::symmetric_kl(Eigen::Vector2d(0.5, 0.5), Eigen::Vector3d(0.3, 0.3, 0.4)),
               std::invalid_argument);
}

TEST(Histogram2d, SingleSampleConcentratesMass) {
  const GridMesh mesh{-1, 1, -1, 1, 10, 10};
  const std::vector<Position> samples{Position{{0.05, -0.95}}};
  const auto h = ckam::histogram_2d(samples, mesh);
  EXPECT_NEAR(h.masses(5, 0), 1.0, 1e-8);
  EXPECT_NEAR(h.masses.sum(), 1.0, 1e-12);
  EXPECT_GT(h.masses.minCoeff(), 0.0);
}

TEST(Histogram2d, UniformSamplesApproachUniformMasses) {
  const GridMesh mesh{0, 4, -2, 2, 8, 8};
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> ux(0.0, 4.0), uy(-2.0, 2.0);
  const std::size_t n = 200000;
  std::vector<Position> samples;
  samples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) samples.push_back(Position{{ux(rng), uy(rng)}});
  const auto h = ckam::histogram_2d(samples, mesh);
  EXPECT_LT((h.masses.array() - 1.0 / 64.0).abs().maxCoeff(), 3.0 / std::sqrt(double(n)));
  EXPECT_NEAR(h.masses.sum(), 1.0, 1e-12);
}

TEST(Histogram2d, ClampsOutsideSamplesToEdges) {
  const GridMesh mesh{0, 1, 0, 1, 4, 4};
  const std::vector<Position> samples{Position{{-5.0, 0.5}}, Position{{9.0, 9.0}}};
  const auto h = ckam::histogram_2d(samples, mesh, 0.0);
  EXPECT_DOUBLE_EQ(h.masses(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(h.masses(3, 3), 0.5);
}

TEST(Histogram2d, RejectsEmptyInput) {
  const GridMesh mesh{0, 1, 0, 1, 4, 4};
  EXPECT_THROW(ckam::histogram_2d(std::vector<Position>{}, mesh), std::invalid_argument);
  EXPECT_THROW(ckam::histogram_2d(std::vector<Position>{Position{{1.0}}}, mesh),
               std::invalid_argument);
}

TEST(Ess, IndependentDrawsGiveNominalSize) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<double> x(10000);
    for (double& v : x) v = normal(rng);
    const double ratio = ckam::effective_sample_size(x) / 10000.0;
    EXPECT_GE(ratio, 0.8);
    EXPECT_LE(ratio, 1.2);
  }
}

TEST(Ess, Ar1MatchesAnalyticIntegratedAutocorrelation) {
  std::mt19937_64 rng(3);
  const std::size_t n = 100000;
  const auto x = ar1_chain(rng, n, 0.5);
  const double ratio = ckam::effective_sample_size(x) / double(n);
  EXPECT_NEAR(ratio, 1.0 / 3.0, 0.2 / 3.0);
}

TEST(Ess, DuplicatingSamplesHalvesEss) {
  std::mt19937_64 rng(8);
  const auto x = ar1_chain(rng, 20000, 0.3);
  std::vector<double> doubled;
  for (double v : x) {
    doubled.push_back(v);
    doubled.push_back(v);
  }
  const double base = ckam::effective_sample_size(x) / double(x.size());
  const double dup = ckam::effective_sample_size(doubled) / double(doubled.size());
  EXPECT_NEAR(dup / base, 0.5, 0.05);
}

TEST(Ess, AffineInvariantAndBoundedByLength) {
  std::mt19937_64 rng(30);
  const auto x = ar1_chain(rng, 5000, 0.7);
  std::vector<double> y(x.size());
  std::transform(x.begin(), x.end(), y.begin(), [](double v) { return 4.0 - 3.0 * v; });
  EXPECT_NEAR(ckam::effective_sample_size(x), ckam::effective_sample_size(y), 1e-6);

  // antithetic chains have rho_1 < 0; the estimate is still capped at n
  std::vector<double> alternating(1000);
  for (std::size_t i = 0; i < alternating.size(); ++i) alternating[i] = (i % 2 ? 1.0 : -1.0) + 1e-3 * double(i % 7);
  EXPECT_LE(ckam::effective_sample_size(alternating), 1000.0);
  EXPECT_LE(ckam::effective_sample_size(x), 5000.0);
}

TEST(Ess, MultivariateReportsWorstDimension) {
  std::mt19937_64 rng(31);
  const auto slow = ar1_chain(rng, 5000, 0.9);
  const auto fast = ar1_chain(rng, 5000, 0.0);
  std::vector<Position> samples;
  for (std::size_t i = 0; i < slow.size(); ++i) samples.push_back(Position{{fast[i], slow[i]}});
  EXPECT_DOUBLE_EQ(ckam::effective_sample_size(samples), ckam::effective_sample_size(slow));
}

TEST(Ess, RejectsDegenerateChains) {
  EXPECT_THROW(ckam::effective_sample_size(std::vector<double>(100, 2.5)), std::domain_error);
  EXPECT_THROW(ckam::effective_sample_size(std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST(MarginalKl, SingleDimensionEqualsPlainKl) {
  const Target t = Target::standard_normal(1);
  std::mt19937_64 rng(40);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Position> samples;
  std::vector<double> xs;
  for (int i = 0; i < 3000; ++i) {
    xs.push_back(normal(rng));
    samples.push_back(Position{{xs.back()}});
  }
  const auto [lo, hi] = t.marginal_range(0);
  const double plain = ckam::symmetric_kl(ckam::histogram_1d(xs, lo, hi, 100),
                                          ckam::discretized_marginal(t, 0, lo, hi, 100));
  EXPECT_DOUBLE_EQ(ckam::marginal_mean_symmetric_kl(samples, t, 100), plain);
}

TEST(MarginalKl, DiscretizedMarginalMatchesCdfDifferences) {
  const Target t = Target::grid5(3);
  const auto [lo, hi] = t.marginal_range(1);
  const auto m = ckam::discretized_marginal(t, 1, lo, hi, 50, 0.0);
  EXPECT_NEAR(m.sum(), 1.0, 1e-12);
  const double w = (hi - lo) / 50;
  for (int b = 1; b < 49; ++b) {
    // midpoint rule on the density as an independent check of the bin mass
    double acc = 0.0;
    for (int k = 0; k < 200; ++k) acc += t.marginal_density_1d(1, lo + b * w + (k + 0.5) * w / 200);
    EXPECT_NEAR(m(b), acc * w / 200, 1e-8);
  }
}

TEST(MarginalKl, InvariantUnderDimensionPermutation) {
  const Target t = Target::grid5(4);
  const std::vector<double> means{-30, -15, 0, 15, 30};
  std::mt19937_64 rng(41);
  std::vector<Position> samples, permuted;
  for (int i = 0; i < 5000; ++i) {
    samples.push_back(ckam::test::draw_product_grid(rng, 4, means, 15.0));
    Position p = samples.back();
    std::swap(p(0), p(3));
    std::swap(p(1), p(2));
    permuted.push_back(p);
  }
  EXPECT_NEAR(ckam::marginal_mean_symmetric_kl(samples, t, 100),
              ckam::marginal_mean_symmetric_kl(permuted, t, 100), 1e-12);
}

TEST(MarginalKl, DirectSamplesDecreaseTowardZero) {
  const Target t = Target::grid5(4);
  const std::vector<double> means{-30, -15, 0, 15, 30};
  std::vector<double> medians;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> values;
    for (int seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(100 + seed);
      std::vector<Position> samples;
      for (std::size_t i = 0; i < n; ++i) samples.push_back(ckam::test::draw_product_grid(rng, 4, means, 15.0));
      values.push_back(ckam::marginal_mean_symmetric_kl(samples, t, 100));
    }
    medians.push_back(median(values));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
  // small-n noise floor: roughly (bins - 1) / n for a well-matched histogram
  EXPECT_LT(medians[0], 0.5);
  EXPECT_LT(medians[2], 5e-3);
}

TEST(GridKl, IndependentSampleSetsConvergeWithN) {
  const GridMesh mesh{-14, 14, -14, 14, 100, 100};
  const auto sampler = ckam::test::bimodal_sampler();
  std::vector<double> medians;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    std::vector<double> values;
    for (int seed = 0; seed < 5; ++seed) {
      std::mt19937_64 rng(200 + seed);
      std::vector<Position> a, b;
      for (std::size_t i = 0; i < n; ++i) {
        a.push_back(sampler.draw(rng));
        b.push_back(sampler.draw(rng));
      }
      const auto ha = ckam::histogram_2d(a, mesh, 1e-4);
      const auto hb = ckam::histogram_2d(b, mesh, 1e-4);
      values.push_back(ckam::symmetric_kl(ha.masses.reshaped(), hb.masses.reshaped()));
    }
    medians.push_back(median(values));
  }
  EXPECT_GT(medians[0], medians[1]);
  EXPECT_GT(medians[1], medians[2]);
}

TEST(GridKl, DirectSamplesFromTargetScoreLow) {
  const GridMesh mesh{-14, 14, -14, 14, 100, 100};
  const auto sampler = ckam::test::bimodal_sampler();
  std::mt19937_64 rng(7);
  std::vector<Position> exact, one_mode;
  for (int i = 0; i < 100000; ++i) {
    exact.push_back(sampler.draw(rng));
    Position p = exact.back();
    p(0) = -std::abs(p(0));
    one_mode.push_back(p);
  }
  const Target t = Target::bimodal2d();
  const double good = ckam::grid_symmetric_kl(exact, t, mesh);
  const double bad = ckam::grid_symmetric_kl(one_mode, t, mesh);
  EXPECT_LT(good, 1.0);
  EXPECT_GT(bad, 5.0 * good);
}
