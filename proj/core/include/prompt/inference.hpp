#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prompt/model.hpp"
#include "prompt/rng.hpp"
#include "prompt/types.hpp"

namespace prompt {

struct RelevanceWeights;

// Proxy evidence z about the target task parameter. The likelihood takes no
// shared parameter, so z cannot carry information about theta directly.
struct ProxyObservation {
  using LogLikelihood = std::function<double(std::span<const double> payload, const TaskParam&)>;

  std::vector<double> payload;
  LogLikelihood log_likelihood;

  double operator()(const TaskParam& psi) const { return log_likelihood(payload, psi); }
};

// Constant likelihood: the proxy carries no information.
ProxyObservation uninformative_proxy();
// Likelihood 1 at `psi` and 0 elsewhere.
ProxyObservation point_proxy(const TaskParam& psi);
// Independent pieces of proxy evidence multiplied together.
ProxyObservation combine_proxies(std::vector<ProxyObservation> parts);

// log p(d_i | theta_t, psi_p) for every grid node pair and observation,
// laid out [psi][theta][i] so one psi slice is contiguous.
class LogLikelihoodTable {
 public:
  LogLikelihoodTable(const ModelSpec& model, const SourceData& data, const ParameterGrid& grid);

  std::size_t theta_count() const { return theta_count_; }
  std::size_t psi_count() const { return psi_count_; }
  std::size_t size() const { return n_; }

  std::span<const double> row(std::size_t psi, std::size_t theta) const {
    return {values_.data() + (psi * theta_count_ + theta) * n_, n_};
  }
  double at(std::size_t psi, std::size_t theta, std::size_t i) const {
    return values_[(psi * theta_count_ + theta) * n_ + i];
  }
  // log of the model's mode density at (theta, psi), when the model has one.
  bool has_log_mode() const { return !log_mode_.empty(); }
  double log_mode(std::size_t psi, std::size_t theta) const { return log_mode_[psi * theta_count_ + theta]; }

 private:
  std::size_t theta_count_;
  std::size_t psi_count_;
  std::size_t n_;
  std::vector<double> values_;
  std::vector<double> log_mode_;
};

// Normalized joint mass over (theta node, psi node), row-major by theta.
struct PosteriorTable {
  ParameterGrid grid;
  std::vector<double> joint_mass;
  double log_evidence = 0.0;

  double mass(std::size_t theta, std::size_t psi) const { return joint_mass[theta * grid.psi_count() + psi]; }
  std::vector<double> theta_marginal() const;
  std::vector<double> psi_marginal() const;
};

struct PsiPosterior {
  std::vector<double> mass;
  double log_normalizer = 0.0;
};

PsiPosterior proxy_posterior(const ParameterGrid& grid, const ProxyObservation& proxy);

// Partition of observation indices into groups known to share one task
// parameter.
using Groups = std::vector<std::vector<std::size_t>>;

// Classic transfer posterior. Each observation (or each known group)
// marginalizes its own task parameter over `source_psi_prior`; the target psi
// keeps `target_psi_mass` (the grid prior when omitted).
PosteriorTable classic_posterior(const ModelSpec& model, const SourceData& data,
                                 const ParameterGrid& grid, std::span<const double> source_psi_prior);
PosteriorTable classic_posterior(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                 std::span<const double> source_psi_prior,
                                 const Groups* groups = nullptr,
                                 std::optional<std::vector<double>> target_psi_mass = std::nullopt);

// sum_i w_i log p(d_i | theta, psi_i = psi_target)
double r_weighted_likelihood(const ModelSpec& model, const SourceData& data, const SharedParam& theta,
                             const TaskParam& psi_target, std::span<const double> weights);

// Throws ValidationError unless every weight is finite and in [0, 1].
void check_weights(std::span<const double> weights, std::size_t n);

PosteriorTable r_weighted_posterior(const ModelSpec& model, const SourceData& data,
                                    const ParameterGrid& grid,
                                    const std::vector<RelevanceWeights>& weights_per_psi,
                                    const ProxyObservation& proxy);
PosteriorTable r_weighted_posterior(const LogLikelihoodTable& table, const ParameterGrid& grid,
                                    const std::vector<RelevanceWeights>& weights_per_psi,
                                    const ProxyObservation& proxy);

// Mixture over the posterior nodes of the model's outcome distribution at a
// new observation's covariates.
class PosteriorPredictive {
 public:
  PosteriorPredictive(ModelSpec model, PosteriorTable table, Observation templ);

  double log_density(const Observation& outcome) const;
  double log_density(std::span<const double> outcome) const;
  Observation sample(Rng& rng) const;

 private:
  ModelSpec model_;
  PosteriorTable table_;
  Observation templ_;
  std::vector<double> cumulative_;
};

// Samples as a flat row-major matrix with theta coordinates first.
struct McmcChain {
  std::size_t theta_dim = 0;
  std::size_t psi_dim = 0;
  std::vector<double> values;
  std::size_t accepted = 0;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t dim() const { return theta_dim + psi_dim; }
  std::size_t size() const { return dim() == 0 ? 0 : values.size() / dim(); }
  std::span<const double> sample(std::size_t k) const { return {values.data() + k * dim(), dim()}; }
  SharedParam theta(std::size_t k) const;
  TaskParam psi(std::size_t k) const;
  std::vector<double> column(std::size_t j) const;
};

struct MetropolisOptions {
  std::size_t n_samples = 10000;       // kept after burn-in
  double burn_in_fraction = 0.25;      // of the whole run
  std::size_t adapt_batch = 100;
  double target_acceptance = 0.3;
  std::vector<double> initial;         // defaults to the centre of the support
  std::vector<double> initial_scales;  // defaults to 1/10 of each support side
  std::uint64_t seed = 0;
};

using LogTarget = std::function<double(std::span<const double>)>;

// Random-walk Metropolis. During burn-in the proposal covariance is learned
// from the chain and its overall scale tuned towards the target acceptance.
// Proposals outside `support` are rejected.
McmcChain metropolis(const LogTarget& target, const Box& support, std::size_t theta_dim,
                     const MetropolisOptions& options);

using WeightsFn = std::function<std::vector<double>(const TaskParam& psi_target)>;
using PriorLogDensity = std::function<double(const SharedParam&, const TaskParam&)>;

// prior + proxy + sum_i w_i(psi) log p(d_i | theta, psi_i = psi) over
// coordinates (theta, psi_target).
LogTarget r_weighted_log_target(const ModelSpec& model, const SourceData& data, const ProxyObservation& proxy,
                                const WeightsFn& weights_fn, const PriorLogDensity& prior_log_density);

// Chain over (theta, psi_target) targeting r_weighted_log_target.
McmcChain metropolis_posterior(const ModelSpec& model, const SourceData& data,
                               const ProxyObservation& proxy, const WeightsFn& weights_fn,
                               const PriorLogDensity& prior_log_density, std::size_t n_samples,
                               std::uint64_t seed, MetropolisOptions options = {});

// log of the mean of exp(values) with a batch-means standard error on the
// log scale; `values` is an autocorrelated chain of log terms.
struct LogMeanEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
LogMeanEstimate log_mean_exp(std::span<const double> values, std::size_t batches = 20);

// log E_target[exp(log_factor)] by stepping-stone tempering: one chain per
// stage targets target + beta_k * log_factor, with beta_k = (k / stages)^(1/0.3),
// and the stage increments are summed. A plain average of exp(log_factor) over
// target draws is dominated by rare draws when log_factor is sharp.
struct TemperedEstimate {
  double value = 0.0;
  double std_error = 0.0;
  double acceptance_rate = 0.0;  // of the untempered stage
  std::vector<std::string> warnings;
};
TemperedEstimate tempered_log_expectation(const LogTarget& target, const LogTarget& log_factor, const Box& support,
                                          std::size_t theta_dim, const MetropolisOptions& options,
                                          std::size_t stages);

// Classic fixed-effects target with one task parameter per known group:
// coordinates are theta followed by one psi per group.
LogTarget known_groups_log_target(const ModelSpec& model, const SourceData& data, const Groups& groups,
                                  std::function<double(std::span<const double>)> prior_log_density);

}  // namespace prompt
