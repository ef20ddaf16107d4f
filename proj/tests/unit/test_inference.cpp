#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/harness.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"
#include "prompt/relevance.hpp"
#include "prompt/synthetic.hpp"
#include "test_support.hpp"

using namespace prompt;
using boost::multiprecision::cpp_bin_float_50;

namespace {

const auto kStdNormal = [](double x) { return normal_log_pdf(x, 0.0, 1.0); };

ParameterGrid small_linear_grid(std::size_t nodes = 41) {
  return ParameterGrid::uniform({-10, 10}, nodes, kStdNormal, {-10, 10}, nodes, kStdNormal);
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

ToyInstance fixed_toy(std::size_t n, std::uint64_t seed) {
  ToyLimits limits;
  limits.min_theta = limits.max_theta = 3;
  limits.max_psi = 2;
  limits.max_outcomes = 4;
  limits.max_n = n;
  for (std::uint64_t s = seed;; ++s) {
    auto toy = random_toy_instance(s, limits);
    if (toy.grid.psi_count() == 2 && toy.table[0][0].size() == 4 && toy.design.size() == n) return toy;
  }
}

SourceData toy_data(const ToyInstance& toy, std::uint64_t seed) {
  Rng rng(seed);
  return simulate_dataset(toy.model, toy.design, toy.truth, rng);
}

}  // namespace

TEST(ProxyPosterior, UninformativeAndOneHot) {
  const auto grid = small_linear_grid(11);
  const auto flat = proxy_posterior(grid, uninformative_proxy());
  for (std::size_t p = 0; p < grid.psi_count(); ++p) EXPECT_NEAR(flat.mass[p], grid.psi_prior_mass()[p], 1e-15);
  const auto point = proxy_posterior(grid, point_proxy(grid.psi_nodes()[4]));
  EXPECT_DOUBLE_EQ(point.mass[4], 1.0);
  EXPECT_DOUBLE_EQ(sum(point.mass), 1.0);
}

TEST(ProxyPosterior, ZeroLikelihoodEverywhereIsDegenerate) {
  const auto grid = small_linear_grid(5);
  EXPECT_THROW(proxy_posterior(grid, point_proxy(TaskParam{0.123})), DegenerateError);
}

TEST(ProxyPosterior, BinomialRatingsMatchHighPrecisionEnumeration) {
  const auto model = linear_model();
  const auto grid = ParameterGrid::uniform({-10, 10}, 51, kStdNormal, {-3, 3}, 50, kStdNormal);
  const Observation prompt{{0.8, 1.3}, {0.4}, std::nullopt};
  const auto expert = gen_expert_proxy(model, grid, {prompt}, TaskParam{0.5}, 0.0, 9);
  const auto post = proxy_posterior(grid, expert.combined);
  const int z = expert.ratings[0];

  std::vector<cpp_bin_float_50> weights(grid.psi_count());
  cpp_bin_float_50 total = 0;
  for (std::size_t p = 0; p < grid.psi_count(); ++p) {
    // p~(psi): theta-prior average of the prompt density over its peak value.
    cpp_bin_float_50 avg = 0;
    for (std::size_t t = 0; t < grid.theta_count(); ++t) {
      const cpp_bin_float_50 mean = cpp_bin_float_50(grid.theta_nodes()[t][0]) * 0.8 +
                                    cpp_bin_float_50(grid.psi_nodes()[p][0]) * 1.3;
      avg += cpp_bin_float_50(grid.theta_prior_mass()[t]) * exp(-(cpp_bin_float_50(0.4) - mean) *
                                                                 (cpp_bin_float_50(0.4) - mean) / 2);
    }
    cpp_bin_float_50 fit = avg > 1 ? cpp_bin_float_50(1) : avg;
    cpp_bin_float_50 choose = 1;
    for (int k = 1; k <= z; ++k) choose = choose * (7 - z + k) / k;
    weights[p] = cpp_bin_float_50(grid.psi_prior_mass()[p]) * choose * pow(fit, z) * pow(1 - fit, 7 - z);
    total += weights[p];
  }
  for (std::size_t p = 0; p < grid.psi_count(); ++p) {
    EXPECT_NEAR(post.mass[p], static_cast<double>(weights[p] / total), 1e-12) << "node " << p;
  }
}

TEST(ClassicPosterior, ThetaConstantLikelihoodKeepsPrior) {
  ProbabilityTensor table(3, std::vector<std::vector<double>>(2));
  const std::vector<std::vector<double>> rows{{0.2, 0.8}, {0.6, 0.4}};
  for (auto& plane : table) plane = rows;
  const auto model = discrete_toy_model(2, 3, 2, table);
  const ParameterGrid grid({{0.0}, {1.0}, {2.0}}, {0.2, 0.3, 0.5}, {{0.0}, {1.0}}, {0.5, 0.5});
  const SourceData data({{{}, {0.0}, {}}, {{}, {1.0}, {}}, {{}, {1.0}, {}}});
  const auto post = classic_posterior(model, data, grid, grid.psi_prior_mass());
  const auto m = post.theta_marginal();
  EXPECT_NEAR(m[0], 0.2, 1e-15);
  EXPECT_NEAR(m[2], 0.5, 1e-15);
}

TEST(ClassicPosterior, SingleThetaNodeHasMassOne) {
  const auto model = linear_model();
  const ParameterGrid grid({{0.3}}, {1.0}, {{-1.0}, {0.0}, {1.0}}, {0.2, 0.5, 0.3});
  const auto data = test_support::correlated_linear_data(10, 2);
  const auto post = classic_posterior(model, data, grid, grid.psi_prior_mass());
  EXPECT_DOUBLE_EQ(post.theta_marginal()[0], 1.0);
  EXPECT_NEAR(sum(post.joint_mass), 1.0, 1e-12);
  EXPECT_NEAR(post.psi_marginal()[1], 0.5, 1e-15);
}

TEST(ClassicPosterior, ToyMatchesHighPrecisionEnumeration) {
  const auto toy = fixed_toy(6, 40);
  const auto data = toy_data(toy, 41);
  const auto post = classic_posterior(toy.model, data, toy.grid, toy.source_psi_prior);
  std::vector<cpp_bin_float_50> oracle(3);
  cpp_bin_float_50 total = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    cpp_bin_float_50 v = toy.grid.theta_prior_mass()[t];
    for (const auto& d : data) {
      cpp_bin_float_50 mix = 0;
      for (std::size_t p = 0; p < 2; ++p) {
        mix += cpp_bin_float_50(toy.source_psi_prior[p]) *
               cpp_bin_float_50(toy.table[t][p][static_cast<std::size_t>(d.value())]);
      }
      v *= mix;
    }
    oracle[t] = v;
    total += v;
  }
  const auto m = post.theta_marginal();
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(m[t], static_cast<double>(oracle[t] / total), 1e-12);
  EXPECT_NEAR(post.log_evidence, static_cast<double>(log(total)), 1e-12);
}

TEST(ClassicPosterior, KnownGroupsShareOneTaskParameter) {
  const auto toy = fixed_toy(4, 60);
  const auto data = toy_data(toy, 61);
  const Groups groups{{0, 2}, {1, 3}};
  const LogLikelihoodTable table(toy.model, data, toy.grid);
  const auto post = classic_posterior(table, toy.grid, toy.source_psi_prior, &groups);
  std::vector<double> oracle(3);
  for (std::size_t t = 0; t < 3; ++t) {
    double v = toy.grid.theta_prior_mass()[t];
    for (const auto& g : groups) {
      double mix = 0.0;
      for (std::size_t p = 0; p < 2; ++p) {
        double term = toy.source_psi_prior[p];
        for (std::size_t i : g) term *= toy.table[t][p][static_cast<std::size_t>(data[i].value())];
        mix += term;
      }
      v *= mix;
    }
    oracle[t] = v;
  }
  const auto expected = normalized(oracle);
  const auto m = post.theta_marginal();
  for (std::size_t t = 0; t < 3; ++t) EXPECT_NEAR(m[t], expected[t], 1e-14);
  const Groups overlapping{{0, 1}, {1, 2, 3}};
  EXPECT_THROW(classic_posterior(table, toy.grid, toy.source_psi_prior, &overlapping), ValidationError);
}

TEST(ClassicPosterior, EvidenceDecreasesForDataOutsideSupport) {
  const auto model = linear_model();
  const auto grid = small_linear_grid();
  Rng rng(4);
  std::vector<Observation> obs;
  double previous = 0.0;
  for (int k = 0; k < 12; ++k) {
    obs.push_back(model.simulate({1.0, 1.0}, std::nullopt, {10.0}, {10.0}, rng));
    obs.back().outcome[0] += 40.0;
    const double ev = classic_posterior(model, SourceData(obs), grid, grid.psi_prior_mass()).log_evidence;
    if (k > 0) EXPECT_LE(ev, previous);
    previous = ev;
  }
}

TEST(RWeightedLikelihood, WeightExamples) {
  const auto model = linear_model();
  const auto data = test_support::correlated_linear_data(5, 3);
  const SharedParam theta{0.4};
  const TaskParam psi{-0.2};
  double plain = 0.0;
  for (const auto& d : data) plain += model.log_likelihood(d, theta, psi);
  EXPECT_NEAR(r_weighted_likelihood(model, data, theta, psi, std::vector<double>(5, 1.0)), plain, 1e-12);
  EXPECT_EQ(r_weighted_likelihood(model, data, theta, psi, std::vector<double>(5, 0.0)), 0.0);
  const SourceData one(std::vector<Observation>{data[0]});
  EXPECT_NEAR(r_weighted_likelihood(model, one, theta, psi, std::vector<double>{0.5}),
              0.5 * model.log_likelihood(data[0], theta, psi), 1e-15);
}

TEST(RWeightedLikelihood, RejectsOutOfRangeWeights) {
  const auto model = linear_model();
  const auto data = test_support::correlated_linear_data(2, 3);
  EXPECT_THROW(r_weighted_likelihood(model, data, {0.0}, {0.0}, std::vector<double>{0.5, 1.5}), ValidationError);
  EXPECT_THROW(r_weighted_likelihood(model, data, {0.0}, {0.0}, std::vector<double>{-0.1, 0.5}), ValidationError);
  EXPECT_THROW(r_weighted_likelihood(model, data, {0.0}, {0.0}, std::vector<double>{0.5}), ValidationError);
}

TEST(RWeightedPosterior, MatchesClassicOnEveryModel) {
  for (const auto& [name, gap] : test_support::engine_equivalence_all_models()) EXPECT_LT(gap, 1e-10) << name;
}

TEST(RWeightedPosterior, ZeroWeightsAndFlatProxyReturnPrior) {
  const auto grid = small_linear_grid(15);
  const auto data = test_support::correlated_linear_data(6, 1);
  std::vector<RelevanceWeights> zeros;
  for (std::size_t p = 0; p < grid.psi_count(); ++p) zeros.push_back(constant_relevance(6, p, 0.0));
  const auto post = r_weighted_posterior(linear_model(), data, grid, zeros, uninformative_proxy());
  for (std::size_t t = 0; t < 15; ++t) {
    for (std::size_t p = 0; p < 15; ++p) {
      EXPECT_NEAR(post.mass(t, p), grid.theta_prior_mass()[t] * grid.psi_prior_mass()[p], 1e-15);
    }
  }
}

TEST(RWeightedPosterior, ToyMatchesHighPrecisionEnumeration) {
  const auto toy = fixed_toy(4, 90);
  const auto data = toy_data(toy, 91);
  const auto proxy = toy.proxy_model().observe({1.0});
  const LogLikelihoodTable table(toy.model, data, toy.grid);
  const auto weights = toy.weights_provider()(data, table, proxy);
  const auto post = r_weighted_posterior(table, toy.grid, weights, proxy);
  std::vector<cpp_bin_float_50> joint;
  cpp_bin_float_50 total = 0;
  for (std::size_t t = 0; t < 3; ++t) {
    for (std::size_t p = 0; p < 2; ++p) {
      cpp_bin_float_50 v = cpp_bin_float_50(toy.grid.theta_prior_mass()[t]) * toy.grid.psi_prior_mass()[p] *
                           toy.proxy_table[p][1];
      for (std::size_t i = 0; i < data.size(); ++i) {
        v *= pow(cpp_bin_float_50(toy.table[t][p][static_cast<std::size_t>(data[i].value())]),
                 cpp_bin_float_50(weights[p].weights[i]));
      }
      joint.push_back(v);
      total += v;
    }
  }
  for (std::size_t k = 0; k < joint.size(); ++k) {
    EXPECT_NEAR(post.joint_mass[k], static_cast<double>(joint[k] / total), 1e-12);
  }
  EXPECT_NEAR(post.log_evidence, static_cast<double>(log(total)), 1e-12);
}

TEST(RWeightedPosterior, RejectsMisorderedWeights) {
  const auto grid = small_linear_grid(3);
  const auto data = test_support::correlated_linear_data(2, 1);
  std::vector<RelevanceWeights> w{constant_relevance(2, 1), constant_relevance(2, 0), constant_relevance(2, 2)};
  EXPECT_THROW(r_weighted_posterior(linear_model(), data, grid, w, uninformative_proxy()), ValidationError);
}

TEST(PosteriorPredictive, PointMassEqualsModel) {
  const auto model = linear_model();
  const ParameterGrid grid({{0.5}, {1.0}}, {0.5, 0.5}, {{-1.0}, {2.0}}, {0.5, 0.5});
  PosteriorTable table{grid, {0.0, 0.0, 1.0, 0.0}, 0.0};
  const Observation templ{{0.3, 0.7}, {0.0}, std::nullopt};
  const PosteriorPredictive pred(model, table, templ);
  Observation at = templ;
  at.outcome = {0.9};
  EXPECT_NEAR(pred.log_density(at), model.log_likelihood(at, {1.0}, {-1.0}), 1e-14);
}

TEST(PosteriorPredictive, IntegratesToOneAndMatchesTwoTermMixture) {
  const auto model = linear_model();
  const ParameterGrid grid({{-1.0}, {2.0}}, {0.5, 0.5}, {{0.0}}, {1.0});
  PosteriorTable table{grid, {0.5, 0.5}, 0.0};
  const Observation templ{{1.0, 0.0}, {0.0}, std::nullopt};
  const PosteriorPredictive pred(model, table, templ);
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double y) { return std::exp(pred.log_density(std::vector<double>{y})); }, -40.0, 40.0, 15, 1e-12);
  EXPECT_NEAR(integral, 1.0, 1e-6);
  const double mid = 0.5;
  const double hand = 0.5 * std::exp(-0.5 * 1.5 * 1.5) / std::sqrt(2 * M_PI) * 2;
  EXPECT_NEAR(std::exp(pred.log_density(std::vector<double>{mid})), hand, 1e-15);
  Rng rng(3);
  double total = 0.0;
  for (int k = 0; k < 20000; ++k) total += pred.sample(rng).value();
  EXPECT_NEAR(total / 20000, 0.5, 0.05);
}

TEST(Metropolis, PriorOnlyChainRecoversPriorMeans) {
  const auto model = linear_model();
  const SourceData data({{{1.0, 1.0}, {0.0}, std::nullopt}});
  auto prior = [](const SharedParam& t, const TaskParam& p) {
    return normal_log_pdf(t[0], 1.0, 1.0) + normal_log_pdf(p[0], -2.0, 0.5);
  };
  const auto chain = metropolis_posterior(
      model, data, uninformative_proxy(), [](const TaskParam&) { return std::vector<double>{0.0}; }, prior, 40000, 12);
  const auto theta = chain.column(0);
  const auto psi = chain.column(1);
  auto mean = [](const std::vector<double>& v) { return sum(v) / static_cast<double>(v.size()); };
  EXPECT_LT(std::abs(mean(theta) - 1.0), 3 * test_support::batch_means_se(theta));
  EXPECT_LT(std::abs(mean(psi) + 2.0), 3 * test_support::batch_means_se(psi));
  EXPECT_GE(chain.acceptance_rate, 0.1);
  EXPECT_LE(chain.acceptance_rate, 0.6);
  EXPECT_TRUE(chain.warnings.empty());
}

TEST(Metropolis, ConjugateNormalPosterior) {
  Rng rng(6);
  std::vector<double> y(10);
  double s = 0.0;
  for (double& v : y) s += (v = rng.normal(1.5, 1.0));
  const double var = 1.0 / (1.0 / 4.0 + 10.0);
  const double mean = var * s;
  auto target = [&](std::span<const double> x) {
    double lp = normal_log_pdf(x[0], 0.0, 2.0);
    for (double v : y) lp += normal_log_pdf(v, x[0], 1.0);
    return lp;
  };
  MetropolisOptions options;
  options.n_samples = 60000;
  options.seed = 13;
  const auto chain = metropolis(target, Box::cube(1, -10, 10), 1, options);
  const auto x = chain.column(0);
  const double m = sum(x) / x.size();
  std::vector<double> sq(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) sq[k] = (x[k] - m) * (x[k] - m);
  EXPECT_LT(std::abs(m - mean), 3 * test_support::batch_means_se(x));
  EXPECT_LT(std::abs(sum(sq) / x.size() - var), 3 * test_support::batch_means_se(sq));
}

TEST(Metropolis, InitializationAndSupportErrors) {
  auto flat = [](std::span<const double>) { return 0.0; };
  MetropolisOptions options;
  options.initial = {20.0};
  EXPECT_THROW(metropolis(flat, Box::cube(1, -1, 1), 1, options), ValidationError);
  options.initial = {0.0};
  EXPECT_THROW(metropolis([](std::span<const double>) { return kNegInf; }, Box::cube(1, -1, 1), 1, options),
               NumericalError);
  options.n_samples = 5000;
  const auto chain = metropolis(flat, Box::cube(1, -1, 1), 1, options);
  for (double v : chain.column(0)) EXPECT_TRUE(v >= -1.0 && v <= 1.0);
  EXPECT_EQ(chain.size(), 5000u);
}

TEST(Metropolis, SameSeedSameChain) {
  auto target = [](std::span<const double> x) { return -0.5 * (x[0] * x[0] + x[1] * x[1]); };
  MetropolisOptions options;
  options.n_samples = 3000;
  options.seed = 99;
  const auto a = metropolis(target, Box::cube(2, -10, 10), 1, options);
  const auto b = metropolis(target, Box::cube(2, -10, 10), 1, options);
  EXPECT_EQ(a.values, b.values);
}

TEST(Metropolis, HistogramMatchesGridPosterior) {
  const auto result = test_support::metropolis_grid_tv(200000, 2024);
  EXPECT_LT(result.tv, 0.05);
}

TEST(GridRefinement, DoublingResolutionChangesInformationGainLittle) {
  harness::ExperimentConfig config;
  config.n_outcome = 75;
  harness::Cell cell;
  cell.multicollinearity = 2.0;
  cell.target_resemblance_pct = 100.0;
  cell.theta_star = -1.0;
  cell.label = "refine";
  config.grid_resolution = 201;
  const auto coarse = harness::run_linear_simulation(config, cell, 0);
  config.grid_resolution = 401;
  const auto fine = harness::run_linear_simulation(config, cell, 0);
  EXPECT_LT(std::abs(fine.ig_classic - coarse.ig_classic), 0.005 * std::abs(fine.ig_classic));
  EXPECT_LT(std::abs(fine.ig_rweighted - coarse.ig_rweighted), 0.005 * std::abs(fine.ig_rweighted));
}

TEST(LogMeanExp, ConstantAndTwoPointValues) {
  const std::vector<double> flat(100, -700.0);
  const auto a = log_mean_exp(flat);
  EXPECT_NEAR(a.value, -700.0, 1e-12);
  EXPECT_EQ(a.std_error, 0.0);
  std::vector<double> mixed(100, std::log(1.0));
  for (std::size_t k = 50; k < 100; ++k) mixed[k] = std::log(3.0);
  EXPECT_NEAR(log_mean_exp(mixed).value, std::log(2.0), 1e-12);
  EXPECT_THROW(log_mean_exp(std::vector<double>{}), ValidationError);
}

TEST(TemperedLogExpectation, MatchesGaussianEvidenceForSharpFactor) {
  // E_{x ~ N(0,1)}[N(y; x, s^2)] = N(y; 0, 1 + s^2); the factor sits in the
  // prior's tail where a plain average over prior draws is unreliable.
  const double y = 3.0;
  const double s = 0.05;
  const LogTarget target = [](std::span<const double> v) { return normal_log_pdf(v[0], 0.0, 1.0); };
  const LogTarget factor = [&](std::span<const double> v) { return normal_log_pdf(y, v[0], s); };
  MetropolisOptions options;
  options.n_samples = 4000;
  options.initial = {0.0};
  options.initial_scales = {0.5};
  const double exact = normal_log_pdf(y, 0.0, std::sqrt(1.0 + s * s));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    options.seed = seed;
    const auto estimate = tempered_log_expectation(target, factor, Box::cube(1, -10.0, 10.0), 1, options, 8);
    EXPECT_GT(estimate.std_error, 0.0);
    EXPECT_LT(std::abs(estimate.value - exact), 4 * estimate.std_error + 0.02) << "seed " << seed;
    EXPECT_LT(std::abs(estimate.value - exact), 0.3) << "seed " << seed;
  }
  EXPECT_THROW(tempered_log_expectation(target, factor, Box::cube(1, -10.0, 10.0), 1, options, 0), ValidationError);
}
