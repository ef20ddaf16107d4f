#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"
#include "prompt/relevance.hpp"

namespace prompt {
namespace {

std::vector<double> log_of(std::span<const double> mass) {
  std::vector<double> out(mass.size());
  for (std::size_t k = 0; k < mass.size(); ++k) out[k] = mass[k] > 0.0 ? std::log(mass[k]) : kNegInf;
  return out;
}

void check_normalized(std::span<const double> mass, const char* what) {
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw ValidationError(std::string(what) + " has a negative or NaN entry");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError(std::string(what) + " is not normalized");
}

}  // namespace

ProxyObservation uninformative_proxy() {
  return {{}, [](std::span<const double>, const TaskParam&) { return 0.0; }};
}

ProxyObservation point_proxy(const TaskParam& psi) {
  return {psi.value(), [](std::span<const double> at, const TaskParam& candidate) {
            for (std::size_t j = 0; j < at.size(); ++j) {
              if (candidate[j] != at[j]) return kNegInf;
            }
            return 0.0;
          }};
}

ProxyObservation combine_proxies(std::vector<ProxyObservation> parts) {
  ProxyObservation combined;
  for (const auto& part : parts) {
    combined.payload.insert(combined.payload.end(), part.payload.begin(), part.payload.end());
  }
  combined.log_likelihood = [parts = std::move(parts)](std::span<const double>, const TaskParam& psi) {
    double total = 0.0;
    for (const auto& part : parts) total += part(psi);
    return total;
  };
  return combined;
}

std::vector<double> PosteriorTable::theta_marginal() const {
  const std::size_t np = grid.psi_count();
  std::vector<double> out(grid.theta_count(), 0.0);
  for (std::size_t t = 0; t < out.size(); ++t) {
    for (std::size_t p = 0; p < np; ++p) out[t] += joint_mass[t * np + p];
  }
  return out;
}

std::vector<double> PosteriorTable::psi_marginal() const {
  const std::size_t np = grid.psi_count();
  std::vector<double> out(np, 0.0);
  for (std::size_t t = 0; t < grid.theta_count(); ++t) {
    for (std::size_t p = 0; p < np; ++p) out[p] += joint_mass[t * np + p];
  }
  return out;
}

PsiPosterior proxy_posterior(const ParameterGrid& grid, const ProxyObservation& proxy) {
  std::vector<double> log_mass = log_of(grid.psi_prior_mass());
  for (std::size_t p = 0; p < log_mass.size(); ++p) {
    if (log_mass[p] == kNegInf) continue;
    const double lz = proxy(grid.psi_nodes()[p]);
    if (std::isnan(lz)) throw NumericalError("proxy log-likelihood is NaN at psi node " + std::to_string(p));
    log_mass[p] += lz;
  }
  PsiPosterior out;
  try {
    out.log_normalizer = normalize_log_weights(log_mass);
  } catch (const DegenerateError&) {
    throw DegenerateError("proxy likelihood is zero wherever the psi prior has mass");
  }
  out.mass = std::move(log_mass);
  return out;
}

PosteriorTable classic_posterior(const ModelSpec& model, const SourceData& data,
                                 const ParameterGrid& grid, std::span<const double> source_psi_prior) {
  return classic_posterior(LogLikelihoodTable(model, data, grid), grid, source_psi_prior);
}

PosteriorTable classic_posterior(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                 std::span<const double> source_psi_prior, const Groups* groups,
                                 std::optional<std::vector<double>> target_psi_mass) {
  const std::size_t nt = grid.theta_count();
  const std::size_t np = grid.psi_count();
  if (table.theta_count() != nt || table.psi_count() != np) throw ValidationError("table and grid disagree");
  if (source_psi_prior.size() != np) throw ValidationError("source psi prior has the wrong length");
  check_normalized(source_psi_prior, "source psi prior");
  const std::vector<double> target = target_psi_mass ? normalized(*target_psi_mass) : grid.psi_prior_mass();
  if (target.size() != np) throw ValidationError("target psi mass has the wrong length");

  Groups singletons;
  if (groups == nullptr) {
    singletons.resize(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) singletons[i] = {i};
    groups = &singletons;
  } else {
    std::vector<int> seen(table.size(), 0);
    for (const auto& g : *groups) {
      for (std::size_t i : g) {
        if (i >= table.size() || seen[i]++) throw ValidationError("groups must partition the observations");
      }
    }
    for (int s : seen) {
      if (!s) throw ValidationError("groups must partition the observations");
    }
  }

  const auto log_src = log_of(source_psi_prior);
  std::vector<double> log_theta = log_of(grid.theta_prior_mass());
  std::vector<double> terms(np);
  for (std::size_t t = 0; t < nt; ++t) {
    if (log_theta[t] == kNegInf) continue;
    double acc = log_theta[t];
    for (const auto& g : *groups) {
      for (std::size_t p = 0; p < np; ++p) {
        double s = log_src[p];
        if (s != kNegInf) {
          for (std::size_t i : g) s += table.at(p, t, i);
        }
        terms[p] = s;
      }
      acc += log_sum_exp(terms);
      if (acc == kNegInf) break;
    }
    if (std::isnan(acc)) throw NumericalError("classic posterior is NaN at theta node " + std::to_string(t));
    log_theta[t] = acc;
  }
  PosteriorTable out{grid, {}, 0.0};
  out.log_evidence = normalize_log_weights(log_theta);
  out.joint_mass.resize(nt * np);
  for (std::size_t t = 0; t < nt; ++t) {
    for (std::size_t p = 0; p < np; ++p) out.joint_mass[t * np + p] = log_theta[t] * target[p];
  }
  return out;
}

void check_weights(std::span<const double> weights, std::size_t n) {
  if (weights.size() != n) {
    throw ValidationError("expected " + std::to_string(n) + " weights, got " + std::to_string(weights.size()));
  }
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0 && weights[i] <= 1.0)) {
      throw ValidationError("weight " + std::to_string(i) + " = " + std::to_string(weights[i]) +
                            " lies outside [0, 1]");
    }
  }
}

double r_weighted_likelihood(const ModelSpec& model, const SourceData& data, const SharedParam& theta,
                             const TaskParam& psi_target, std::span<const double> weights) {
  check_weights(weights, data.size());
  std::vector<double> ll(data.size());
  model.batch(data, theta, psi_target, ll);
  double total = 0.0;
  for (std::size_t i = 0; i < ll.size(); ++i) total += weighted_log(weights[i], ll[i]);
  return total;
}

PosteriorTable r_weighted_posterior(const ModelSpec& model, const SourceData& data,
                                    const ParameterGrid& grid,
                                    const std::vector<RelevanceWeights>& weights_per_psi,
                                    const ProxyObservation& proxy) {
  return r_weighted_posterior(LogLikelihoodTable(model, data, grid), grid, weights_per_psi, proxy);
}

PosteriorTable r_weighted_posterior(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                    const std::vector<RelevanceWeights>& weights_per_psi,
                                    const ProxyObservation& proxy) {
  const std::size_t nt = grid.theta_count();
  const std::size_t np = grid.psi_count();
  if (table.theta_count() != nt || table.psi_count() != np) throw ValidationError("table and grid disagree");
  if (weights_per_psi.size() != np) throw ValidationError("need one weight vector per psi node");

  const auto log_theta = log_of(grid.theta_prior_mass());
  const auto log_psi = log_of(grid.psi_prior_mass());
  std::vector<double> log_joint(nt * np, kNegInf);
  for (std::size_t p = 0; p < np; ++p) {
    const auto& w = weights_per_psi[p];
    if (w.psi_node_index != p) throw ValidationError("weight vectors must be ordered by psi node");
    check_weights(w.weights, table.size());
    if (log_psi[p] == kNegInf) continue;
    const double lz = proxy(grid.psi_nodes()[p]);
    if (std::isnan(lz)) throw NumericalError("proxy log-likelihood is NaN at psi node " + std::to_string(p));
    if (lz == kNegInf) continue;
    for (std::size_t t = 0; t < nt; ++t) {
      if (log_theta[t] == kNegInf) continue;
      const auto ll = table.row(p, t);
      double acc = log_theta[t] + log_psi[p] + lz;
      for (std::size_t i = 0; i < ll.size(); ++i) acc += weighted_log(w.weights[i], ll[i]);
      if (std::isnan(acc)) throw NumericalError("r-weighted posterior is NaN");
      log_joint[t * np + p] = acc;
    }
  }
  PosteriorTable out{grid, {}, 0.0};
  try {
    out.log_evidence = normalize_log_weights(log_joint);
  } catch (const DegenerateError&) {
    throw DegenerateError("r-weighted posterior has zero mass everywhere; check proxy and prior supports");
  }
  out.joint_mass = std::move(log_joint);
  return out;
}

}  // namespace prompt
