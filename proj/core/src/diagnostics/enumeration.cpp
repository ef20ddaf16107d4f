#include <cmath>
#include <limits>

#include "diagnostics_internal.hpp"
#include "prompt/diagnostics.hpp"
#include "prompt/errors.hpp"
#include "prompt/math.hpp"

namespace prompt {

void check_truth(const ModelSpec& model, const TrueProcess& truth, const Design& design) {
  if (design.empty()) throw ValidationError("design needs at least one observation");
  if (truth.psi_star.size() != design.size()) {
    throw ValidationError("true process needs one task parameter per observation");
  }
  model.check_theta(truth.theta_star);
  for (const auto& psi : truth.psi_star) model.check_psi(psi);
  model.check_psi(truth.psi_target_star);
}

double outcome_combinations(const ModelSpec& model, const Design& design) {
  if (!model.outcome_space) return std::numeric_limits<double>::infinity();
  double total = 1.0;
  for (const auto& templ : design) total *= static_cast<double>(model.outcome_space(templ).size());
  return total;
}

void for_each_dataset(const ModelSpec& model, const Design& design, const TrueProcess& truth,
                      bool include_impossible, const std::function<void(const SourceData&, double)>& visit) {
  if (!model.outcome_space) throw ConfigurationError(model.name + ": outcomes are not enumerable");
  check_truth(model, truth, design);
  const std::size_t n = design.size();
  std::vector<std::vector<Observation>> options(n);
  std::vector<std::vector<double>> log_probs(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& outcome : model.outcome_space(design[i])) {
      Observation obs = design[i];
      obs.outcome = std::move(outcome);
      const double lp = model.log_likelihood(obs, truth.theta_star, truth.psi_star[i]);
      if (lp == kNegInf && !include_impossible) continue;
      options[i].push_back(std::move(obs));
      log_probs[i].push_back(lp);
    }
    if (options[i].empty()) return;
  }
  std::vector<std::size_t> index(n, 0);
  std::vector<Observation> current(n);
  while (true) {
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      current[i] = options[i][index[i]];
      lp += log_probs[i][index[i]];
    }
    visit(SourceData(current), lp);
    std::size_t i = 0;
    while (i < n && ++index[i] == options[i].size()) index[i++] = 0;
    if (i == n) break;
  }
}

void enumerate_datasets(const ModelSpec& model, const Design& design, const TrueProcess& truth,
                        const std::function<void(const SourceData&, double)>& visit) {
  for_each_dataset(model, design, truth, false, visit);
}

SourceData simulate_dataset(const ModelSpec& model, const Design& design, const TrueProcess& truth, Rng& rng) {
  check_truth(model, truth, design);
  std::vector<Observation> obs;
  obs.reserve(design.size());
  for (std::size_t i = 0; i < design.size(); ++i) {
    obs.push_back(model.simulate(design[i].covariates, design[i].trial_count, truth.theta_star,
                                 truth.psi_star[i], rng));
  }
  return SourceData(std::move(obs));
}

std::size_t snap_theta(const ParameterGrid& grid, const SharedParam& theta, double& distance) {
  for (std::size_t j = 0; j < theta.size(); ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& node : grid.theta_nodes()) {
      lo = std::min(lo, node[j]);
      hi = std::max(hi, node[j]);
    }
    if (theta[j] < lo || theta[j] > hi) throw SupportError("theta* lies outside the grid");
  }
  const std::size_t t = grid.nearest_theta(theta);
  double d2 = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) {
    const double diff = grid.theta_nodes()[t][j] - theta[j];
    d2 += diff * diff;
  }
  distance = std::sqrt(d2);
  return t;
}

Estimate summarize(const std::vector<double>& values) {
  Estimate e;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  e.value = mean;
  e.std_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : std::numeric_limits<double>::quiet_NaN();
  return e;
}

}  // namespace prompt
