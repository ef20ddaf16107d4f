#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "diagnostics_internal.hpp"
#include "prompt/diagnostics.hpp"
#include "prompt/errors.hpp"
#include "prompt/math.hpp"

namespace prompt {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_theta_ratio(const PosteriorTable& post, const ParameterGrid& grid, std::size_t t) {
  const double prior = grid.theta_prior_mass()[t];
  if (prior <= 0.0) throw DegenerateError("theta* has zero prior mass");
  const double m = post.theta_marginal()[t];
  return m > 0.0 ? std::log(m) - std::log(prior) : kNegInf;
}

std::size_t sample_index(std::span<const double> mass, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] <= 0.0) continue;
    last = k;
    acc += mass[k];
    if (u < acc) return k;
  }
  return last;
}

}  // namespace

WeightsProvider weights_from_config(const ModelSpec& model, const ParameterGrid& grid, RelevanceConfig config) {
  config.validate();
  return [model, grid, config](const SourceData& data, const LogLikelihoodTable& table,
                               const ProxyObservation& proxy) {
    return refine_relevance(model, data, grid, table, proxy, config).weights_per_psi;
  };
}

double log_posterior_ratio_classic(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                   std::span<const double> source_psi_prior, std::size_t theta_index) {
  return log_theta_ratio(classic_posterior(table, grid, source_psi_prior), grid, theta_index);
}

Estimate info_gain_classic(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, std::span<const double> source_psi_prior,
                           std::size_t n_outer, std::uint64_t seed) {
  double snap = 0.0;
  const std::size_t t = snap_theta(grid, truth.theta_star, snap);
  auto ratio = [&](const SourceData& d) {
    return log_posterior_ratio_classic(LogLikelihoodTable(model, d, grid), grid, source_psi_prior, t);
  };
  Estimate e;
  if (outcome_combinations(model, design) <= kEnumerationLimit) {
    double total = 0.0;
    enumerate_datasets(model, design, truth, [&](const SourceData& d, double lp) {
      total += std::exp(lp) * ratio(d);
    });
    e.value = total;
    e.exact = true;
  } else {
    if (n_outer < 1) throw ValidationError("info gain needs at least one outer sample");
    std::vector<double> draws(n_outer);
    for (std::size_t k = 0; k < n_outer; ++k) {
      Rng rng(derive_seed(seed, k));
      draws[k] = ratio(simulate_dataset(model, design, truth, rng));
    }
    e = summarize(draws);
  }
  e.snap_distance = snap;
  return e;
}

Estimate info_gain_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                             const ParameterGrid& grid, const RelevanceConfig& config,
                             const ProxyModel& proxy_model, ProxyExpectation expectation,
                             std::size_t n_outer, std::uint64_t seed) {
  return info_gain_rweighted(model, truth, design, grid, weights_from_config(model, grid, config), proxy_model,
                             expectation, n_outer, seed);
}

Estimate info_gain_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                             const ParameterGrid& grid, const WeightsProvider& weights,
                             const ProxyModel& proxy_model, ProxyExpectation expectation,
                             std::size_t n_outer, std::uint64_t seed) {
  double snap = 0.0;
  const std::size_t t = snap_theta(grid, truth.theta_star, snap);
  auto ratio = [&](const SourceData& d, const LogLikelihoodTable& table, std::vector<double> payload) {
    const auto proxy = proxy_model.observe(std::move(payload));
    return log_theta_ratio(r_weighted_posterior(table, grid, weights(d, table, proxy), proxy), grid, t);
  };
  // log P(z) for an enumerated payload.
  auto log_proxy_mass = [&](const std::vector<double>& z) {
    if (expectation == ProxyExpectation::true_proxy) return proxy_model.log_likelihood(z, truth.psi_target_star);
    std::vector<double> terms;
    for (std::size_t p = 0; p < grid.psi_count(); ++p) {
      const double m = grid.psi_prior_mass()[p];
      if (m > 0.0) terms.push_back(std::log(m) + proxy_model.log_likelihood(z, grid.psi_nodes()[p]));
    }
    return log_sum_exp(terms);
  };

  Estimate e;
  if (outcome_combinations(model, design) <= kEnumerationLimit && !proxy_model.payload_space.empty()) {
    std::vector<double> log_pz;
    for (const auto& z : proxy_model.payload_space) log_pz.push_back(log_proxy_mass(z));
    double total = 0.0;
    enumerate_datasets(model, design, truth, [&](const SourceData& d, double lp) {
      const LogLikelihoodTable table(model, d, grid);
      for (std::size_t k = 0; k < log_pz.size(); ++k) {
        if (log_pz[k] == kNegInf) continue;
        total += std::exp(lp + log_pz[k]) * ratio(d, table, proxy_model.payload_space[k]);
      }
    });
    e.value = total;
    e.exact = true;
  } else {
    if (n_outer < 1) throw ValidationError("info gain needs at least one outer sample");
    if (!proxy_model.simulate) throw ConfigurationError("proxy model cannot simulate payloads");
    std::vector<double> draws(n_outer);
    for (std::size_t k = 0; k < n_outer; ++k) {
      Rng rng(derive_seed(seed, k));
      const auto d = simulate_dataset(model, design, truth, rng);
      const TaskParam& psi = expectation == ProxyExpectation::true_proxy
                                 ? truth.psi_target_star
                                 : grid.psi_nodes()[sample_index(grid.psi_prior_mass(), rng)];
      draws[k] = ratio(d, LogLikelihoodTable(model, d, grid), proxy_model.simulate(psi, rng));
    }
    e = summarize(draws);
  }
  e.snap_distance = snap;
  return e;
}

Divergence delta_classic(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                         const ParameterGrid& grid, std::span<const double> source_psi_prior) {
  check_truth(model, truth, design);
  if (source_psi_prior.size() != grid.psi_count()) throw ValidationError("source psi prior has the wrong length");
  std::vector<double> log_src(source_psi_prior.size());
  for (std::size_t p = 0; p < log_src.size(); ++p) {
    log_src[p] = source_psi_prior[p] > 0.0 ? std::log(source_psi_prior[p]) : kNegInf;
  }
  // log of the psi-marginalized learner density for one observation
  auto log_q = [&](const Observation& obs) {
    std::vector<double> terms(log_src.size());
    for (std::size_t p = 0; p < terms.size(); ++p) {
      terms[p] = log_src[p] == kNegInf
                     ? kNegInf
                     : log_src[p] + model.log_likelihood(obs, truth.theta_star, grid.psi_nodes()[p]);
    }
    return log_sum_exp(terms);
  };

  Divergence out;
  for (std::size_t i = 0; i < design.size(); ++i) {
    double kl_i = 0.0;
    if (model.outcome_space) {
      for (auto& outcome : model.outcome_space(design[i])) {
        Observation obs = design[i];
        obs.outcome = std::move(outcome);
        const double lp = model.log_likelihood(obs, truth.theta_star, truth.psi_star[i]);
        if (lp == kNegInf) continue;
        const double lq = log_q(obs);
        if (lq == kNegInf) return {kInf, true};
        kl_i += std::exp(lp) * (lp - lq);
      }
    } else {
      Observation obs = design[i];
      obs.outcome = {0.0};
      bool violation = false;
      auto integrand = [&](double y) {
        obs.outcome[0] = y;
        const double lp = model.log_likelihood(obs, truth.theta_star, truth.psi_star[i]);
        if (lp == kNegInf || lp < -700.0) return 0.0;
        const double lq = log_q(obs);
        if (lq == kNegInf) {
          violation = true;
          return 0.0;
        }
        return std::exp(lp) * (lp - lq);
      };
      try {
        kl_i = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
            integrand, -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(), 15,
            1e-12);
      } catch (const std::exception& e) {
        throw NumericalError(std::string("delta_classic quadrature failed: ") + e.what());
      }
      if (violation) return {kInf, true};
    }
    out.value += kl_i;
  }
  if (out.value < 0.0 && out.value > -1e-12) out.value = 0.0;
  return out;
}

Divergence delta_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, const DataWeights& weights,
                           TemperedNormalization normalization) {
  const std::size_t n = design.size();
  std::vector<double> ll(n);
  Divergence out;
  for (std::size_t p = 0; p < grid.psi_count(); ++p) {
    const double prior = grid.psi_prior_mass()[p];
    if (prior <= 0.0) continue;
    const auto& psi = grid.psi_nodes()[p];
    double kl = 0.0;
    bool violation = false;
    std::vector<double> log_tempered_all;
    for_each_dataset(model, design, truth, normalization == TemperedNormalization::per_instance,
                     [&](const SourceData& d, double lp) {
                       const auto w = weights(d, p);
                       check_weights(w, n);
                       model.batch(d, truth.theta_star, psi, ll);
                       double tempered = 0.0;
                       for (std::size_t i = 0; i < n; ++i) tempered += weighted_log(w[i], ll[i]);
                       log_tempered_all.push_back(tempered);
                       if (lp == kNegInf) return;
                       if (tempered == kNegInf) {
                         violation = true;
                         return;
                       }
                       kl += std::exp(lp) * (lp - tempered);
                     });
    if (violation) return {kInf, true};
    if (normalization == TemperedNormalization::per_instance) kl += log_sum_exp(log_tempered_all);
    out.value += prior * kl;
  }
  return out;
}

Estimate rho_fidelity(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                      const ParameterGrid& grid, const DataWeights& weights, std::size_t n_outer,
                      std::uint64_t seed) {
  const std::size_t n = design.size();
  if (n < 2) throw ValidationError("fidelity needs at least two observations");
  std::vector<double> ll(n);
  // psi-averaged covariance for one dataset
  auto covariance = [&](const SourceData& d) {
    double total = 0.0;
    for (std::size_t p = 0; p < grid.psi_count(); ++p) {
      const double prior = grid.psi_prior_mass()[p];
      if (prior <= 0.0) continue;
      const auto w = weights(d, p);
      check_weights(w, n);
      model.batch(d, truth.theta_star, grid.psi_nodes()[p], ll);
      double wbar = 0.0;
      double lbar = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        wbar += w[i];
        lbar += ll[i];
      }
      wbar /= static_cast<double>(n);
      lbar /= static_cast<double>(n);
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) cov += (w[i] - wbar) * (ll[i] - lbar);
      total += prior * cov / static_cast<double>(n);
    }
    return total;
  };
  Estimate e;
  if (outcome_combinations(model, design) <= kEnumerationLimit) {
    enumerate_datasets(model, design, truth,
                       [&](const SourceData& d, double lp) { e.value += std::exp(lp) * covariance(d); });
    e.exact = true;
  } else {
    if (n_outer < 1) throw ValidationError("fidelity needs at least one outer sample");
    std::vector<double> draws(n_outer);
    for (std::size_t k = 0; k < n_outer; ++k) {
      Rng rng(derive_seed(seed, k));
      draws[k] = covariance(simulate_dataset(model, design, truth, rng));
    }
    e = summarize(draws);
  }
  return e;
}

EssDis ess_dis(const ModelSpec& model, const SourceData& data, const TrueProcess& truth,
               const TaskParam& psi_target, std::span<const double> weights) {
  check_weights(weights, data.size());
  std::vector<double> ll(data.size());
  model.batch(data, truth.theta_star, psi_target, ll);
  EssDis out;
  for (std::size_t i = 0; i < ll.size(); ++i) {
    out.ess += weights[i];
    out.dis -= ll[i];
  }
  return out;
}

}  // namespace prompt
