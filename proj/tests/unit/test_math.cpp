#include <gtest/gtest.h>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/rng.hpp"

using namespace prompt;

TEST(LogSumExp, HandlesLargeAndEmptyInputs) {
  const std::vector<double> big{1000.0, 1000.0};
  EXPECT_NEAR(log_sum_exp(big), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_EQ(log_sum_exp(std::vector<double>{}), kNegInf);
  EXPECT_EQ(log_sum_exp(std::vector<double>{kNegInf, kNegInf}), kNegInf);
  EXPECT_NEAR(log_sum_exp(std::vector<double>{kNegInf, 0.0}), 0.0, 1e-15);
  EXPECT_NEAR(log_add_exp(std::log(2.0), std::log(3.0)), std::log(5.0), 1e-14);
}

TEST(Sigmoid, StableInBothTails) {
  EXPECT_DOUBLE_EQ(sigmoid(0.0), 0.5);
  EXPECT_NEAR(sigmoid(800.0), 1.0, 0.0);
  EXPECT_GT(sigmoid(-700.0), 0.0);
  EXPECT_NEAR(log_sigmoid(-800.0), -800.0, 1e-12);
  EXPECT_NEAR(log_sigmoid(40.0), -std::exp(-40.0), 1e-30);
}

TEST(WeightedLog, ZeroWeightAnnihilatesNegativeInfinity) {
  EXPECT_EQ(weighted_log(0.0, kNegInf), 0.0);
  EXPECT_DOUBLE_EQ(weighted_log(0.5, -2.0), -1.0);
}

TEST(Densities, MatchBoostDistributions) {
  for (double x : {-3.0, -0.2, 0.0, 1.7}) {
    EXPECT_NEAR(normal_log_pdf(x, 0.4, 1.3), std::log(boost::math::pdf(boost::math::normal(0.4, 1.3), x)), 1e-12);
  }
  for (double x : {0.1, 1.0, 2.718, 9.0}) {
    EXPECT_NEAR(lognormal_log_pdf(x, 1.0, 1.0), std::log(boost::math::pdf(boost::math::lognormal(1.0, 1.0), x)),
                1e-12);
    // shape 3, rate 0.8 is boost's scale 1.25
    EXPECT_NEAR(gamma_log_pdf(x, 3.0, 0.8), std::log(boost::math::pdf(boost::math::gamma_distribution<>(3.0, 1.25), x)),
                1e-12);
  }
  EXPECT_EQ(lognormal_log_pdf(0.0, 1.0, 1.0), kNegInf);
  EXPECT_EQ(gamma_log_pdf(-1.0, 3.0, 0.8), kNegInf);
}

TEST(Binomial, PmfMatchesDirectEvaluation) {
  const double p = 0.3;
  double total = 0.0;
  for (int k = 0; k <= 12; ++k) {
    const double lp = binomial_log_pmf(k, 12, std::log(p), std::log1p(-p));
    const double direct = boost::math::binomial_coefficient<double>(12, k) * std::pow(p, k) * std::pow(1 - p, 12 - k);
    EXPECT_NEAR(std::exp(lp), direct, 1e-14);
    total += std::exp(lp);
  }
  EXPECT_NEAR(total, 1.0, 1e-13);
  EXPECT_EQ(binomial_log_pmf(0, 5, kNegInf, 0.0), 0.0);
  EXPECT_EQ(binomial_log_pmf(1, 5, kNegInf, 0.0), kNegInf);
  EXPECT_NEAR(log_binomial_coefficient(10, 3), std::log(120.0), 1e-13);
}

TEST(NormalizeLogWeights, ProducesProbabilities) {
  std::vector<double> w{std::log(1.0), std::log(3.0), kNegInf};
  const double z = normalize_log_weights(w);
  EXPECT_NEAR(z, std::log(4.0), 1e-14);
  EXPECT_NEAR(w[0], 0.25, 1e-15);
  EXPECT_NEAR(w[1], 0.75, 1e-15);
  EXPECT_EQ(w[2], 0.0);
  std::vector<double> dead{kNegInf, kNegInf};
  EXPECT_THROW(normalize_log_weights(dead), DegenerateError);
}

TEST(Quantile, TypeSevenOnKnownSample) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.25), 2.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_type7(v, 0.75), 4.0);
  const std::vector<double> w{1, 2, 3, 4};
  EXPECT_DOUBLE_EQ(quantile_type7(w, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(quantile_type7(w, 0.5), 2.5);
}

TEST(Quantile, MatchesSortAndInterpolateOracleOnRandomGroups) {
  Rng rng(11);
  for (int g = 0; g < 100; ++g) {
    const std::size_t n = 1 + rng.below(40);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal(0.0, 3.0);
    std::sort(v.begin(), v.end());
    for (double p : {0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0}) {
      const double h = (static_cast<double>(n) - 1.0) * p;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, n - 1);
      const double oracle = v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
      EXPECT_NEAR(quantile_type7(v, p), oracle, 1e-12);
    }
  }
}
