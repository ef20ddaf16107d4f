#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prompt/rng.hpp"
#include "prompt/types.hpp"

namespace prompt {

// A pluggable probabilistic model p(d_i | theta, psi_i).
struct ModelSpec {
  using LogLikelihood =
      std::function<double(const Observation&, const SharedParam&, const TaskParam&)>;
  // Writes log p(d_i | theta, psi) for every observation into `out`.
  using BatchLogLikelihood = std::function<void(const SourceData&, const SharedParam&,
                                                const TaskParam&, std::span<double> out)>;
  using Simulate = std::function<Observation(const std::vector<double>& covariates,
                                             std::optional<int> trial_count, const SharedParam&,
                                             const TaskParam&, Rng&)>;
  using LogModeDensity = std::function<double(const SharedParam&, const TaskParam&)>;
  using OutcomeSpace = std::function<std::vector<std::vector<double>>(const Observation&)>;

  std::string name;
  std::size_t covariate_dim = 0;
  std::size_t theta_dim = 1;
  std::size_t psi_dim = 1;
  bool binomial = false;
  Box theta_support;
  Box psi_support;

  LogLikelihood log_likelihood;
  Simulate simulate;
  // Optional; falls back to a loop over log_likelihood.
  BatchLogLikelihood log_likelihood_batch;
  // Log of the outcome density at its mode for fixed parameters. Empty when
  // the notion is undefined for the model.
  LogModeDensity log_mode_density;
  // For discrete outcomes: every possible outcome vector for an observation
  // with the given covariates/trial count. Empty for continuous models.
  OutcomeSpace outcome_space;

  // Throws ValidationError when an observation does not fit this model.
  void check(const Observation& obs) const;
  void check(const SourceData& data) const;
  void check_theta(const SharedParam& theta) const;
  void check_psi(const TaskParam& psi) const;

  void batch(const SourceData& data, const SharedParam& theta, const TaskParam& psi,
             std::span<double> out) const;
};

// y ~ Normal(theta * x1 + psi * x2, 1); support [-10, 10] for both.
ModelSpec linear_model();

// y ~ Binomial(N, sigmoid(theta . x + psi)) with 4 treatment indicators.
ModelSpec binomial_logit_model();

// Zero-mean GP trajectory on `x_grid` with covariance
// (RBF_theta + RBF_psi) / 2 plus diagonal jitter.
ModelSpec gp_model(std::vector<double> x_grid);

// Categorical outcome read from table[theta][psi][y]; theta and psi are
// node indices stored as doubles.
using ProbabilityTensor = std::vector<std::vector<std::vector<double>>>;
ModelSpec discrete_toy_model(std::size_t outcome_count, std::size_t theta_count,
                             std::size_t psi_count, ProbabilityTensor table);

namespace gp {

// Jitter schedule: start, growth factor and ceiling.
inline constexpr double kJitterStart = 1e-8;
inline constexpr double kJitterGrowth = 10.0;
inline constexpr double kJitterMax = 1e-4;

// Dense row-major m x m kernel matrix without jitter.
std::vector<double> kernel_matrix(std::span<const double> x_grid, double theta, double psi);

// Cholesky factorization of the kernel plus the smallest jitter that works.
struct Factor {
  std::vector<double> lower;  // row-major m x m
  double log_det = 0.0;
  double jitter = 0.0;
  std::size_t dim = 0;

  // y^T K^{-1} y
  double quadratic_form(std::span<const double> y) const;
  double log_density(std::span<const double> y) const;
  // Log density at the mode (y = 0).
  double log_peak() const;
};

Factor factorize(std::span<const double> x_grid, double theta, double psi);

}  // namespace gp

}  // namespace prompt
