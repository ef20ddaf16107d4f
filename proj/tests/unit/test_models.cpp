#include <gtest/gtest.h>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <Eigen/Dense>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/model.hpp"
#include "test_support.hpp"

using namespace prompt;
using boost::multiprecision::cpp_bin_float_50;

namespace {

Observation scalar(std::vector<double> x, double y, std::optional<int> n = std::nullopt) {
  return Observation{std::move(x), {y}, n};
}

std::vector<double> unit_grid(std::size_t m) {
  std::vector<double> x(m);
  for (std::size_t k = 0; k < m; ++k) x[k] = static_cast<double>(k) / static_cast<double>(m - 1);
  return x;
}

ProbabilityTensor random_table(std::size_t nt, std::size_t np, std::size_t ny, std::uint64_t seed) {
  Rng rng(seed);
  ProbabilityTensor table(nt, std::vector<std::vector<double>>(np, std::vector<double>(ny)));
  for (auto& plane : table) {
    for (auto& row : plane) {
      double total = 0.0;
      for (double& p : row) total += (p = 0.1 + rng.uniform());
      for (double& p : row) p /= total;
      double head = 0.0;
      for (std::size_t k = 0; k + 1 < ny; ++k) head += row[k];
      row.back() = 1.0 - head;
    }
  }
  return table;
}

}  // namespace

TEST(LinearModel, DensityAtMeanAndOneSigma) {
  const auto m = linear_model();
  EXPECT_NEAR(m.log_likelihood(scalar({1, 0}, 0.7), {0.7}, {3.0}), -0.91893853320467274, 1e-12);
  EXPECT_NEAR(m.log_likelihood(scalar({0, 1}, 2.5), {5.0}, {1.5}), -0.91893853320467274 - 0.5, 1e-12);
}

TEST(LinearModel, SimulatedMeanMatchesPredictor) {
  const auto m = linear_model();
  Rng rng(11);
  double total = 0.0;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) total += m.simulate({1.0, 1.0}, std::nullopt, {-1.0}, {2.0}, rng).value();
  EXPECT_NEAR(total / draws, 1.0, 0.02);
}

TEST(LinearModel, GoodnessOfFitAtThreePoints) {
  const auto m = linear_model();
  const std::vector<std::array<double, 4>> points{{{0.5, -1.0, 1.0, 2.0}}, {{-2.0, 0.3, 0.2, -1.0}},
                                                  {{1.5, 1.5, -0.7, 0.4}}};
  std::uint64_t seed = 100;
  for (const auto& [theta, psi, x1, x2] : points) {
    Rng rng(seed++);
    std::vector<double> sample(5000);
    for (double& v : sample) v = m.simulate({x1, x2}, std::nullopt, {theta}, {psi}, rng).value();
    const boost::math::normal dist(theta * x1 + psi * x2, 1.0);
    const double d = test_support::ks_statistic(sample, [&](double y) { return boost::math::cdf(dist, y); });
    EXPECT_LT(d, test_support::ks_critical_001(sample.size()));
  }
}

TEST(LinearModel, DensityIntegratesToOne) {
  const auto m = linear_model();
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double y) { return std::exp(m.log_likelihood(scalar({0.4, -1.2}, y), {2.0}, {-0.5})); }, -60.0, 60.0, 15,
      1e-12);
  EXPECT_NEAR(integral, 1.0, 1e-6);
}

TEST(BinomialLogit, CoinFlipAndSaturation) {
  const auto m = binomial_logit_model();
  EXPECT_NEAR(m.log_likelihood(scalar({1, 0, 0, 0}, 0, 1), {0, 0, 0, 0}, {0.0}), std::log(0.5), 1e-14);
  const double saturated = m.log_likelihood(scalar({1, 0, 0, 0}, 20, 20), {10, 0, 0, 0}, {10.0});
  EXPECT_LE(saturated, 0.0);
  EXPECT_GT(saturated, -1e-7);
}

TEST(BinomialLogit, PmfMatchesHighPrecisionOracle) {
  const auto m = binomial_logit_model();
  const double value = m.log_likelihood(scalar({0, 1, 0, 0}, 7, 10), {0, 1, 0, 0}, {0.5});
  const cpp_bin_float_50 p = 1 / (1 + exp(cpp_bin_float_50(-1.5)));
  const cpp_bin_float_50 oracle = log(cpp_bin_float_50(120) * pow(p, 7) * pow(1 - p, 3));
  EXPECT_NEAR(value, static_cast<double>(oracle), 1e-13);
}

TEST(BinomialLogit, RejectsImpossibleCounts) {
  const auto m = binomial_logit_model();
  EXPECT_THROW(m.log_likelihood(scalar({1, 0, 0, 0}, 11, 10), {0, 0, 0, 0}, {0.0}), ValidationError);
  EXPECT_THROW(m.check(scalar({1, 0, 0, 0}, 1)), ValidationError);
}

TEST(BinomialLogit, PmfSumsToOneAndSimulationFits) {
  const auto m = binomial_logit_model();
  const SharedParam theta{0.3, -0.4, 0.1, 0.0};
  const TaskParam psi{-0.6};
  const std::vector<double> x{1, 0, 0, 0};
  double total = 0.0;
  std::vector<double> probs;
  for (int k = 0; k <= 12; ++k) {
    probs.push_back(std::exp(m.log_likelihood(scalar(x, k, 12), theta, psi)));
    total += probs.back();
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  Rng rng(5);
  std::vector<double> counts(13, 0.0);
  for (int k = 0; k < 20000; ++k) counts[static_cast<std::size_t>(m.simulate(x, 12, theta, psi, rng).value())] += 1;
  EXPECT_GT(test_support::chi_square_p_value(counts, probs), 0.01);
}

TEST(GpModel, KernelHasUnitDiagonalAndBoundedOffDiagonal) {
  const auto x = unit_grid(10);
  const auto k = gp::kernel_matrix(x, 0.7, 2.5);
  for (std::size_t a = 0; a < 10; ++a) {
    EXPECT_DOUBLE_EQ(k[a * 10 + a], 1.0);
    for (std::size_t b = 0; b < 10; ++b) {
      EXPECT_LE(k[a * 10 + b], 1.0);
      EXPECT_DOUBLE_EQ(k[a * 10 + b], k[b * 10 + a]);
    }
  }
  const auto f = gp::factorize(x, 0.7, 2.5);
  EXPECT_GE(f.jitter, gp::kJitterStart);
  EXPECT_LE(f.jitter, gp::kJitterMax);
}

TEST(GpModel, EqualLengthscalesGiveSingleRbf) {
  const auto x = unit_grid(6);
  const auto k = gp::kernel_matrix(x, 0.4, 0.4);
  for (std::size_t a = 0; a < 6; ++a) {
    for (std::size_t b = 0; b < 6; ++b) {
      const double d = x[a] - x[b];
      EXPECT_NEAR(k[a * 6 + b], std::exp(-d * d / (2 * 0.4 * 0.4)), 1e-15);
    }
  }
}

TEST(GpModel, ZeroTrajectoryMatchesLuDeterminant) {
  const auto x = unit_grid(5);
  const auto m = gp_model(x);
  const double theta = 0.3;
  const double psi = 1.1;
  const auto f = gp::factorize(x, theta, psi);
  const auto k = gp::kernel_matrix(x, theta, psi);
  Eigen::MatrixXd cov(5, 5);
  for (int a = 0; a < 5; ++a) {
    for (int b = 0; b < 5; ++b) cov(a, b) = 2.0 * M_PI * (k[a * 5 + b] + (a == b ? f.jitter : 0.0));
  }
  const double log_det = std::log(Eigen::FullPivLU<Eigen::MatrixXd>(cov).determinant());
  const double value = m.log_likelihood(Observation{{}, std::vector<double>(5, 0.0), std::nullopt}, {theta}, {psi});
  EXPECT_NEAR(value, -0.5 * log_det, 1e-8);
}

TEST(GpModel, PositiveDefiniteAcrossSupport) {
  const auto x = unit_grid(10);
  Rng rng(77);
  for (int k = 0; k < 100; ++k) {
    const double theta = 0.05 + rng.uniform() * 11.95;
    const double psi = 0.05 + rng.uniform() * 11.95;
    const auto f = gp::factorize(x, theta, psi);
    for (std::size_t a = 0; a < 10; ++a) EXPECT_GT(f.lower[a * 10 + a], 0.0);
  }
}

TEST(GpModel, RejectsBadGridAndLengthscale) {
  EXPECT_THROW(gp_model({0.0}), ValidationError);
  EXPECT_THROW(gp_model({0.0, 0.5, 0.5}), ValidationError);
  EXPECT_THROW(gp::factorize(unit_grid(3), 0.0, 1.0), SupportError);
}

TEST(GpModel, SimulatedMarginalsAreStandardNormal) {
  const auto x = unit_grid(4);
  const auto m = gp_model(x);
  Rng rng(8);
  for (std::size_t point = 0; point < 3; ++point) {
    const double theta = 0.2 + point;
    const double psi = 2.0 - 0.5 * static_cast<double>(point);
    std::vector<double> sample(4000);
    for (double& v : sample) v = m.simulate({}, std::nullopt, {theta}, {psi}, rng).outcome[2];
    const auto f = gp::factorize(x, theta, psi);
    const boost::math::normal dist(0.0, std::sqrt(1.0 + f.jitter));
    EXPECT_LT(test_support::ks_statistic(sample, [&](double y) { return boost::math::cdf(dist, y); }),
              test_support::ks_critical_001(sample.size()));
  }
}

TEST(DiscreteToy, UniformAndOneHotTables) {
  ProbabilityTensor uniform(2, std::vector<std::vector<double>>(2, std::vector<double>(4, 0.25)));
  const auto u = discrete_toy_model(4, 2, 2, uniform);
  for (int y = 0; y < 4; ++y) EXPECT_NEAR(u.log_likelihood(scalar({}, y), {1.0}, {0.0}), -std::log(4.0), 1e-15);

  ProbabilityTensor onehot(1, std::vector<std::vector<double>>(1, std::vector<double>{0.0, 1.0, 0.0}));
  const auto h = discrete_toy_model(3, 1, 1, onehot);
  EXPECT_EQ(h.log_likelihood(scalar({}, 1), {0.0}, {0.0}), 0.0);
  EXPECT_EQ(h.log_likelihood(scalar({}, 0), {0.0}, {0.0}), kNegInf);
  Rng rng(1);
  for (int k = 0; k < 100; ++k) EXPECT_EQ(h.simulate({}, std::nullopt, {0.0}, {0.0}, rng).value(), 1.0);
}

TEST(DiscreteToy, RejectsUnnormalizedRows) {
  ProbabilityTensor bad(1, std::vector<std::vector<double>>(1, std::vector<double>{0.5, 0.6}));
  EXPECT_THROW(discrete_toy_model(2, 1, 1, bad), ValidationError);
  EXPECT_THROW(discrete_toy_model(3, 1, 1, bad), ValidationError);
}

TEST(DiscreteToy, SimulationMatchesRowsChiSquare) {
  const auto table = random_table(3, 2, 4, 21);
  const auto m = discrete_toy_model(4, 3, 2, table);
  Rng rng(22);
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 2; ++p) {
      std::vector<double> counts(4, 0.0);
      for (int k = 0; k < 100000; ++k) {
        const auto obs = m.simulate({}, std::nullopt, {double(t)}, {double(p)}, rng);
        EXPECT_TRUE(std::isfinite(m.log_likelihood(obs, {double(t)}, {double(p)})));
        counts[static_cast<std::size_t>(obs.value())] += 1;
      }
      EXPECT_GT(test_support::chi_square_p_value(counts, table[t][p]), 0.01) << "theta " << t << " psi " << p;
    }
  }
}

TEST(DiscreteToy, ProbabilitiesSumToOneExactly) {
  const auto table = random_table(2, 3, 4, 3);
  const auto m = discrete_toy_model(4, 2, 3, table);
  double total = 0.0;
  for (const auto& y : m.outcome_space(Observation{})) total += std::exp(m.log_likelihood(Observation{{}, y, {}}, {1.0}, {2.0}));
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(ModelSpec, SupportChecks) {
  const auto m = linear_model();
  EXPECT_THROW(m.check_theta({11.0}), SupportError);
  EXPECT_THROW(m.check_psi({0.0, 1.0}), ValidationError);
  EXPECT_THROW(m.check(scalar({1.0}, 0.0)), ValidationError);
}
