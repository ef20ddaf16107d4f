#include <cmath>

#include "diagnostics_internal.hpp"
#include "prompt/diagnostics.hpp"
#include "prompt/errors.hpp"
#include "prompt/math.hpp"

namespace prompt {

DecompositionCheck check_prop55(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                                const ParameterGrid& grid, const DataWeights& weights) {
  const std::size_t n = design.size();
  const double nd = static_cast<double>(n);
  DecompositionCheck out;
  out.n = n;

  struct Dataset {
    SourceData data;
    double log_prob;
  };
  std::vector<Dataset> datasets;
  enumerate_datasets(model, design, truth,
                     [&](const SourceData& d, double lp) { datasets.push_back({d, lp}); });
  for (const auto& ds : datasets) out.entropy_true -= std::exp(ds.log_prob) * ds.log_prob;

  std::vector<double> ll(n);
  for (std::size_t p = 0; p < grid.psi_count(); ++p) {
    const double prior = grid.psi_prior_mass()[p];
    if (prior <= 0.0) continue;
    for (const auto& ds : datasets) {
      const double prob = prior * std::exp(ds.log_prob);
      const auto w = weights(ds.data, p);
      check_weights(w, n);
      model.batch(ds.data, truth.theta_star, grid.psi_nodes()[p], ll);
      double ess = 0.0;
      double sum_ll = 0.0;
      double tempered = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        ess += w[i];
        sum_ll += ll[i];
        tempered += weighted_log(w[i], ll[i]);
      }
      const double wbar = ess / nd;
      const double lbar = sum_ll / nd;
      double cov = 0.0;
      for (std::size_t i = 0; i < n; ++i) cov += (w[i] - wbar) * (ll[i] - lbar);
      out.delta_rweighted += prob * (ds.log_prob - tempered);
      out.ess_dis_expectation += prob * ess * (-sum_ll);
      out.rho += prob * cov / nd;
    }
  }
  out.residual = out.delta_rweighted - (out.ess_dis_expectation - nd * out.rho - out.entropy_true);
  out.residual_mean_scaled =
      out.delta_rweighted - (out.ess_dis_expectation / nd - nd * out.rho - out.entropy_true);
  return out;
}

BoundCheck check_theorem24(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, std::span<const double> source_psi_prior) {
  double snap = 0.0;
  const std::size_t star = snap_theta(grid, truth.theta_star, snap);
  if (snap > 0.0) throw ValidationError("theorem check needs theta* on a grid node");
  if (source_psi_prior.size() != grid.psi_count()) throw ValidationError("source psi prior has the wrong length");

  const auto& prior = grid.theta_prior_mass();
  BoundCheck out;
  out.a = 1.0 - prior[star];
  if (prior[star] <= 0.0) throw DegenerateError("theta* has zero prior mass");

  std::vector<double> log_prior(prior.size());
  for (std::size_t t = 0; t < prior.size(); ++t) log_prior[t] = prior[t] > 0.0 ? std::log(prior[t]) : kNegInf;
  std::vector<double> log_src(source_psi_prior.size());
  for (std::size_t p = 0; p < log_src.size(); ++p) {
    log_src[p] = source_psi_prior[p] > 0.0 ? std::log(source_psi_prior[p]) : kNegInf;
  }

  bool b_infinite = false;
  enumerate_datasets(model, design, truth, [&](const SourceData& d, double lp) {
    const LogLikelihoodTable table(model, d, grid);
    // log p(d | theta_t) with each psi_i marginalized
    std::vector<double> marginal(grid.theta_count());
    std::vector<double> terms(grid.psi_count());
    for (std::size_t t = 0; t < marginal.size(); ++t) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d.size() && acc != kNegInf; ++i) {
        for (std::size_t p = 0; p < terms.size(); ++p) {
          terms[p] = log_src[p] == kNegInf ? kNegInf : log_src[p] + table.at(p, t, i);
        }
        acc += log_sum_exp(terms);
      }
      marginal[t] = acc;
    }
    std::vector<double> joint(marginal.size());
    std::vector<double> rest;
    for (std::size_t t = 0; t < marginal.size(); ++t) {
      joint[t] = log_prior[t] == kNegInf ? kNegInf : log_prior[t] + marginal[t];
      if (t != star) rest.push_back(joint[t]);
    }
    const double prob = std::exp(lp);
    const double log_evidence = log_sum_exp(joint);
    out.ig_classic += prob * (joint[star] - log_evidence - log_prior[star]);
    out.delta_classic += prob * (lp - marginal[star]);
    if (out.a > 0.0) {
      const double log_rest = log_sum_exp(rest) - std::log(out.a);
      if (log_rest == kNegInf) b_infinite = true;
      out.b += prob * (lp - log_rest);
    }
  });
  if (out.a <= 0.0) {
    out.degenerate = true;
    out.satisfied = out.ig_classic <= 1e-12;
    return out;
  }
  if (b_infinite) out.b = std::numeric_limits<double>::infinity();
  out.satisfied = out.ig_classic <= out.a * (out.b - out.delta_classic) + 1e-12;
  return out;
}

}  // namespace prompt
