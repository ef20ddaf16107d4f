#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "prompt/diagnostics.hpp"
#include "prompt/inference.hpp"
#include "prompt/model.hpp"
#include "prompt/types.hpp"

namespace prompt {

struct LinearScenario {
  double multicollinearity = 0.0;
  std::size_t n_outcome = 75;
  std::size_t n_proxy_prompts = 25;
  double target_resemblance_pct = 100.0;
  double contamination_pct = 0.0;

  void validate() const;
};

struct GpScenario {
  std::size_t n_trajectories = 24;
  std::size_t m_target = 12;
  std::size_t m_source = 8;
  std::size_t resolution = 10;
  double theta_star = 1.0;
  double contamination_pct = 0.0;
  int refinement_T = 3;

  void validate() const;
};

// Rows (x1, x2) with x' ~ N(rho_c, 0.25), x1 ~ N(x', 0.25),
// x2 ~ N(-rho_c^2 / x', 0.25); variances, not standard deviations.
std::vector<std::vector<double>> gen_linear_covariates(double rho_c, std::size_t count, std::uint64_t seed);

// One draw of the linear experiment: source data, expert prompts and truth.
struct LinearSample {
  SourceData source;
  std::vector<Observation> prompts;
  std::vector<TaskParam> prompt_psi;
  TrueProcess truth;
};
LinearSample gen_linear_sample(const LinearScenario& scenario, double theta_star, std::uint64_t seed);

struct GpSample {
  std::vector<double> x_grid;
  SourceData source;
  std::vector<Observation> prompts;
  TrueProcess truth;
};
GpSample gen_gp_trajectories(const GpScenario& scenario, std::uint64_t seed);

// Normalized prompt likelihood p~(psi) in [0, 1]: the prompt's likelihood
// averaged over the theta prior of `grid`, divided by the mode density and
// clipped at 1.
double prompt_fit(const ModelSpec& model, const ParameterGrid& grid, const Observation& prompt,
                  const TaskParam& psi);

// Synthetic expert ratings on a 0..7 scale.
struct ExpertProxy {
  std::vector<ProxyObservation> per_prompt;
  ProxyObservation combined;
  std::vector<int> ratings;
  std::vector<bool> contaminated;
  std::vector<double> fit_at_truth;  // p~ at the true target psi
};
inline constexpr int kExpertScale = 7;

// Ratings z ~ Binomial(7, p~) at psi_target_star, or Binomial(7, 1 - p~) for
// contaminated prompts (exactly round(pct * m) of them, chosen uniformly).
// The learner-side likelihood always assumes no
// contamination. p~ is cached for every psi node of `grid`.
ExpertProxy gen_expert_proxy(const ModelSpec& model, const ParameterGrid& grid,
                             const std::vector<Observation>& prompts, const TaskParam& psi_target_star,
                             double contamination_pct, std::uint64_t seed);

struct ImpreciseProxy {
  ProxyObservation proxy;
  double bias = 0.0;
};
// z ~ N(psi*, sigma) plus an N(0, 3) bias when `bias_flag`; the learner
// models z ~ N(psi, sigma).
ImpreciseProxy gen_imprecise_estimate_proxy(double psi_target_star, double sigma, bool bias_flag,
                                            std::uint64_t seed);

// A random discrete instance for exact-enumeration checks.
struct ToyLimits {
  std::size_t max_theta = 3;
  std::size_t min_theta = 2;
  std::size_t max_psi = 3;
  std::size_t max_outcomes = 4;
  std::size_t max_n = 4;
};

struct ToyInstance {
  ProbabilityTensor table;
  ModelSpec model;
  ParameterGrid grid;
  std::vector<double> source_psi_prior;
  TrueProcess truth;
  Design design;
  // weight_table[psi][i][y] in [0, 1]
  std::vector<std::vector<std::vector<double>>> weight_table;
  // proxy_table[psi][z]: a binary proxy with a random likelihood per psi node
  std::vector<std::vector<double>> proxy_table;

  // Weights for a dataset at a psi node read from `weight_table`.
  DataWeights weights() const;
  WeightsProvider weights_provider() const;
  ProxyModel proxy_model() const;
};
ToyInstance random_toy_instance(std::uint64_t seed, const ToyLimits& limits = {});

}  // namespace prompt
