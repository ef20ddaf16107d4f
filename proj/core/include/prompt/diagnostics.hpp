#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prompt/inference.hpp"
#include "prompt/model.hpp"
#include "prompt/relevance.hpp"
#include "prompt/types.hpp"

namespace prompt {

struct Divergence {
  double value = 0.0;
  bool support_violation = false;  // q = 0 somewhere p > 0; value is +inf
};

double entropy(std::span<const double> p);
// -sum p log q
Divergence cross_entropy(std::span<const double> p, std::span<const double> q);
Divergence kl_divergence(std::span<const double> p, std::span<const double> q);

// The data-generating process: one true task parameter per source
// observation plus the target's.
struct TrueProcess {
  SharedParam theta_star;
  std::vector<TaskParam> psi_star;
  TaskParam psi_target_star;
};

// Covariates and trial counts of the n source observations; outcomes are
// ignored and filled in by enumeration or simulation.
using Design = std::vector<Observation>;

// Monte Carlo or exact estimate.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
  double snap_distance = 0.0;  // distance from theta* to its grid node
};

// Proxy generating model used to take expectations over z.
struct ProxyModel {
  ProxyObservation::LogLikelihood log_likelihood;
  std::function<std::vector<double>(const TaskParam&, Rng&)> simulate;
  // Finite payload space; enables exact expectations.
  std::vector<std::vector<double>> payload_space;

  ProxyObservation observe(std::vector<double> payload) const { return {std::move(payload), log_likelihood}; }
};

// Which distribution z is drawn from inside the IG^R expectation: the
// learner's prior predictive (psi ~ prior) or the true target task.
enum class ProxyExpectation { learner_subjective, true_proxy };

// Relevance weights per psi node for a given dataset and proxy.
using WeightsProvider = std::function<std::vector<RelevanceWeights>(
    const SourceData&, const LogLikelihoodTable&, const ProxyObservation&)>;
WeightsProvider weights_from_config(const ModelSpec& model, const ParameterGrid& grid, RelevanceConfig config);

// Datasets up to this many outcome combinations are enumerated exactly.
inline constexpr double kEnumerationLimit = 2e5;

// Number of joint outcomes of the design, or +inf for continuous models.
double outcome_combinations(const ModelSpec& model, const Design& design);

// Calls visit(data, log P_D*(data)) for every dataset with positive
// probability under the true process.
void enumerate_datasets(const ModelSpec& model, const Design& design, const TrueProcess& truth,
                        const std::function<void(const SourceData&, double)>& visit);

SourceData simulate_dataset(const ModelSpec& model, const Design& design, const TrueProcess& truth, Rng& rng);

// log p(theta* | d) - log p(theta*) of the classic learner for one dataset.
double log_posterior_ratio_classic(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                   std::span<const double> source_psi_prior, std::size_t theta_index);

// E_d[log p(theta* | d) / p(theta*)]: exact when the outcome space is small,
// otherwise Monte Carlo with `n_outer` draws.
Estimate info_gain_classic(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, std::span<const double> source_psi_prior,
                           std::size_t n_outer, std::uint64_t seed);

Estimate info_gain_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                             const ParameterGrid& grid, const WeightsProvider& weights,
                             const ProxyModel& proxy_model, ProxyExpectation expectation,
                             std::size_t n_outer, std::uint64_t seed);
Estimate info_gain_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                             const ParameterGrid& grid, const RelevanceConfig& config,
                             const ProxyModel& proxy_model, ProxyExpectation expectation,
                             std::size_t n_outer, std::uint64_t seed);

// KL(P_D* || P_D|theta*) with each observation's psi marginalized over
// `source_psi_prior`. Exact for discrete outcomes, adaptive quadrature for
// scalar continuous outcomes.
Divergence delta_classic(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                         const ParameterGrid& grid, std::span<const double> source_psi_prior);

// Weights for a dataset at one psi node (index into the grid).
using DataWeights = std::function<std::vector<double>(const SourceData&, std::size_t psi_index)>;

enum class TemperedNormalization { unnormalized, per_instance };

// E_psi~prior[ KL(P_D* || prod_i p(d_i | theta*, psi)^{w_i}) ] by enumeration.
Divergence delta_rweighted(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, const DataWeights& weights,
                           TemperedNormalization normalization = TemperedNormalization::unnormalized);

// Expected within-dataset covariance between weights and the pseudo-intervened
// log-likelihoods, averaged over psi ~ prior.
Estimate rho_fidelity(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                      const ParameterGrid& grid, const DataWeights& weights, std::size_t n_outer,
                      std::uint64_t seed);

struct EssDis {
  double ess = 0.0;
  double dis = 0.0;
};
EssDis ess_dis(const ModelSpec& model, const SourceData& data, const TrueProcess& truth,
               const TaskParam& psi_target, std::span<const double> weights);

// Both sides of the tempered-divergence decomposition, all by enumeration.
struct DecompositionCheck {
  double delta_rweighted = 0.0;
  double ess_dis_expectation = 0.0;  // E[ESS * DIS]
  double rho = 0.0;
  double entropy_true = 0.0;         // H(P_D*); the constant is -H
  std::size_t n = 0;
  // Delta - (E[ESS*DIS] - n rho - H), the decomposition as usually stated.
  double residual = 0.0;
  // Delta - (E[ESS*DIS]/n - n rho - H), which holds for every n.
  double residual_mean_scaled = 0.0;
};
DecompositionCheck check_prop55(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                                const ParameterGrid& grid, const DataWeights& weights);

struct BoundCheck {
  double ig_classic = 0.0;
  double a = 0.0;
  double b = 0.0;
  double delta_classic = 0.0;
  bool satisfied = false;
  bool degenerate = false;  // prior mass 1 at theta*
};
// IG^c <= A (B - Delta^c) with the neighbourhood of theta* being its node.
BoundCheck check_theorem24(const ModelSpec& model, const TrueProcess& truth, const Design& design,
                           const ParameterGrid& grid, std::span<const double> source_psi_prior);

struct DiagnosticsReport {
  double ig_classic = 0.0;
  double ig_rweighted = 0.0;
  double delta_classic = 0.0;
  double delta_rweighted = 0.0;
  double rho_fidelity = 0.0;
  double ess_dis_expectation = 0.0;
  double entropy_true = 0.0;
  double decomposition_residual = 0.0;
  double decomposition_residual_mean_scaled = 0.0;
  double bound_a = 0.0;
  double bound_b = 0.0;
  bool bound_satisfied = false;
};

}  // namespace prompt
