#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "prompt/errors.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"

namespace prompt {

SharedParam McmcChain::theta(std::size_t k) const {
  const auto s = sample(k);
  return SharedParam(std::vector<double>(s.begin(), s.begin() + theta_dim));
}

TaskParam McmcChain::psi(std::size_t k) const {
  const auto s = sample(k);
  return TaskParam(std::vector<double>(s.begin() + theta_dim, s.end()));
}

std::vector<double> McmcChain::column(std::size_t j) const {
  std::vector<double> out(size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = values[k * dim() + j];
  return out;
}

McmcChain metropolis(const LogTarget& target, const Box& support, std::size_t theta_dim,
                     const MetropolisOptions& options) {
  const std::size_t d = support.dim();
  if (d == 0 || theta_dim > d) throw ValidationError("metropolis: bad dimensions");
  if (options.n_samples < 1) throw ValidationError("metropolis: need at least one sample");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0)) {
    throw ValidationError("metropolis: burn-in fraction must lie in [0, 1)");
  }

  std::vector<double> x = options.initial;
  if (x.empty()) {
    for (const auto& side : support.sides) x.push_back(0.5 * (side.lo + side.hi));
  }
  if (x.size() != d || !support.contains(x)) throw ValidationError("metropolis: initial point outside support");
  std::vector<double> base_scale = options.initial_scales;
  if (base_scale.empty()) {
    for (const auto& side : support.sides) base_scale.push_back((side.hi - side.lo) / 10.0);
  }
  if (base_scale.size() != d) throw ValidationError("metropolis: wrong number of proposal scales");
  std::vector<double> scale = base_scale;

  double lp = target(x);
  if (!std::isfinite(lp)) throw NumericalError("metropolis: non-finite log-target at the initial point");

  const auto total = static_cast<std::size_t>(
      std::ceil(static_cast<double>(options.n_samples) / (1.0 - options.burn_in_fraction)));
  const std::size_t burn = total - options.n_samples;

  McmcChain chain;
  chain.theta_dim = theta_dim;
  chain.psi_dim = d - theta_dim;
  chain.seed = options.seed;
  chain.values.reserve(options.n_samples * d);

  Rng rng(options.seed, 0);
  double log_lambda = 0.0;
  std::size_t batch_accepted = 0;
  std::size_t batch_index = 0;
  // Proposal factor: diagonal base scales at first, then the Cholesky factor
  // of the burn-in covariance scaled by 2.38 / sqrt(d).
  Eigen::MatrixXd factor = Eigen::VectorXd::Map(base_scale.data(), static_cast<Eigen::Index>(d)).asDiagonal();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
  Eigen::MatrixXd comoment = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  std::size_t count = 0;
  Eigen::VectorXd z(static_cast<Eigen::Index>(d));
  std::vector<double> y(d);

  for (std::size_t it = 0; it < total; ++it) {
    const double lambda = std::exp(log_lambda);
    for (std::size_t j = 0; j < d; ++j) z[static_cast<Eigen::Index>(j)] = rng.normal();
    Eigen::VectorXd step = factor.triangularView<Eigen::Lower>() * z;
    step *= lambda;
    for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + step[static_cast<Eigen::Index>(j)];
    bool accept = false;
    if (support.contains(y)) {
      const double ly = target(y);
      if (!std::isnan(ly) && ly != kNegInf) {
        const double log_u = std::log(rng.uniform());
        if (log_u < ly - lp) accept = true;
      }
      if (accept) {
        x = y;
        lp = ly;
      }
    }
    if (it < burn) {
      batch_accepted += accept;
      ++count;
      const Eigen::VectorXd xv = Eigen::VectorXd::Map(x.data(), static_cast<Eigen::Index>(d));
      const Eigen::VectorXd delta = xv - mean;
      mean += delta / static_cast<double>(count);
      comoment += delta * (xv - mean).transpose();
      if ((it + 1) % options.adapt_batch == 0) {
        ++batch_index;
        const double rate = static_cast<double>(batch_accepted) / static_cast<double>(options.adapt_batch);
        log_lambda += (rate - options.target_acceptance) / std::sqrt(static_cast<double>(batch_index));
        batch_accepted = 0;
        if (count >= 5 * options.adapt_batch) {
          Eigen::MatrixXd cov = comoment / static_cast<double>(count - 1);
          for (std::size_t j = 0; j < d; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            cov(jj, jj) += 1e-6 * base_scale[j] * base_scale[j];
          }
          Eigen::LLT<Eigen::MatrixXd> llt(cov);
          if (llt.info() == Eigen::Success) {
            const Eigen::MatrixXd lower = llt.matrixL();
            // First switch to the covariance factor: restart from the optimal RWM scale.
            if (batch_index == 5) log_lambda = std::log(2.38 / std::sqrt(static_cast<double>(d)));
            factor = lower;
          }
        }
      }
    } else {
      chain.accepted += accept;
      chain.values.insert(chain.values.end(), x.begin(), x.end());
    }
  }
  chain.acceptance_rate = static_cast<double>(chain.accepted) / static_cast<double>(chain.size());
  if (chain.acceptance_rate < 0.1 || chain.acceptance_rate > 0.6) {
    std::ostringstream msg;
    msg << "acceptance rate " << chain.acceptance_rate << " outside [0.1, 0.6]";
    chain.warnings.push_back(msg.str());
  }
  return chain;
}

LogTarget r_weighted_log_target(const ModelSpec& model, const SourceData& data, const ProxyObservation& proxy,
                                const WeightsFn& weights_fn, const PriorLogDensity& prior_log_density) {
  model.check(data);
  const std::size_t kt = model.theta_dim;
  return [model, data, proxy, weights_fn, prior_log_density, kt,
          ll = std::vector<double>(data.size())](std::span<const double> v) mutable {
    const SharedParam theta(std::vector<double>(v.begin(), v.begin() + kt));
    const TaskParam psi(std::vector<double>(v.begin() + kt, v.end()));
    double lp = prior_log_density(theta, psi);
    if (lp == kNegInf) return lp;
    lp += proxy(psi);
    if (lp == kNegInf) return lp;
    const auto w = weights_fn(psi);
    check_weights(w, data.size());
    model.batch(data, theta, psi, ll);
    for (std::size_t i = 0; i < ll.size(); ++i) lp += weighted_log(w[i], ll[i]);
    return lp;
  };
}

McmcChain metropolis_posterior(const ModelSpec& model, const SourceData& data,
                               const ProxyObservation& proxy, const WeightsFn& weights_fn,
                               const PriorLogDensity& prior_log_density, std::size_t n_samples,
                               std::uint64_t seed, MetropolisOptions options) {
  if (n_samples < 1000) throw ValidationError("metropolis_posterior: need at least 1000 samples");
  Box support = model.theta_support;
  support.sides.insert(support.sides.end(), model.psi_support.sides.begin(), model.psi_support.sides.end());
  const auto target = r_weighted_log_target(model, data, proxy, weights_fn, prior_log_density);
  options.n_samples = n_samples;
  options.seed = seed;
  return metropolis(target, support, model.theta_dim, options);
}

LogMeanEstimate log_mean_exp(std::span<const double> values, std::size_t batches) {
  if (values.empty()) throw ValidationError("log_mean_exp: no values");
  if (batches < 2) throw ValidationError("log_mean_exp: need at least two batches");
  const double top = *std::max_element(values.begin(), values.end());
  if (top == kNegInf) return {kNegInf, 0.0};
  const std::size_t n = values.size();
  const std::size_t per_batch = std::max<std::size_t>(1, n / batches);
  const std::size_t used = std::min(batches, n / per_batch);
  std::vector<double> means(used, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::exp(values[k] - top);
    total += w;
    if (k / per_batch < used) means[k / per_batch] += w / static_cast<double>(per_batch);
  }
  const double mean = total / static_cast<double>(n);
  double ss = 0.0;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double se = used > 1 ? std::sqrt(ss / static_cast<double>(used - 1) / static_cast<double>(used)) : 0.0;
  return {top + std::log(mean), se / mean};
}

TemperedEstimate tempered_log_expectation(const LogTarget& target, const LogTarget& log_factor, const Box& support,
                                          std::size_t theta_dim, const MetropolisOptions& options,
                                          std::size_t stages) {
  if (stages < 1) throw ValidationError("tempered_log_expectation: need at least one stage");
  auto beta = [stages](std::size_t k) {
    return std::pow(static_cast<double>(k) / static_cast<double>(stages), 1.0 / 0.3);
  };
  TemperedEstimate out;
  MetropolisOptions stage_options = options;
  double variance = 0.0;
  for (std::size_t k = 0; k < stages; ++k) {
    const double b = beta(k);
    const double step = beta(k + 1) - b;
    const LogTarget tempered = [&](std::span<const double> v) {
      const double lp = target(v);
      if (lp == kNegInf || b == 0.0) return lp;
      return lp + b * log_factor(v);
    };
    stage_options.seed = derive_seed(options.seed, k);
    const auto chain = metropolis(tempered, support, theta_dim, stage_options);
    if (k == 0) out.acceptance_rate = chain.acceptance_rate;
    for (const auto& w : chain.warnings) out.warnings.push_back("stage " + std::to_string(k) + ": " + w);
    std::vector<double> terms(chain.size());
    for (std::size_t j = 0; j < terms.size(); ++j) terms[j] = step * log_factor(chain.sample(j));
    const auto increment = log_mean_exp(terms);
    out.value += increment.value;
    variance += increment.std_error * increment.std_error;
    const auto last = chain.sample(chain.size() - 1);
    stage_options.initial.assign(last.begin(), last.end());
  }
  out.std_error = std::sqrt(variance);
  return out;
}

LogTarget known_groups_log_target(const ModelSpec& model, const SourceData& data, const Groups& groups,
                                  std::function<double(std::span<const double>)> prior_log_density) {
  model.check(data);
  const std::size_t kt = model.theta_dim;
  const std::size_t kp = model.psi_dim;
  return [model, data, groups, kt, kp, prior = std::move(prior_log_density)](std::span<const double> v) {
    if (v.size() != kt + kp * groups.size()) throw ValidationError("known-groups target: wrong dimension");
    double lp = prior(v);
    if (lp == kNegInf) return lp;
    const SharedParam theta(std::vector<double>(v.begin(), v.begin() + kt));
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto first = v.begin() + kt + g * kp;
      const TaskParam psi(std::vector<double>(first, first + kp));
      for (std::size_t i : groups[g]) lp += model.log_likelihood(data[i], theta, psi);
    }
    return lp;
  };
}

}  // namespace prompt
