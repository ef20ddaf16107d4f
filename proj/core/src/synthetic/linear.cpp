#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/synthetic.hpp"

namespace prompt {

void LinearScenario::validate() const {
  if (!(multicollinearity >= 0.0) || !std::isfinite(multicollinearity)) {
    throw ValidationError("multicollinearity must be a nonnegative number");
  }
  if (n_outcome < 1 || n_proxy_prompts < 1) throw ValidationError("observation counts must be positive");
  if (!(target_resemblance_pct >= 0.0 && target_resemblance_pct <= 100.0)) {
    throw ValidationError("target resemblance must lie in [0, 100]");
  }
  if (!(contamination_pct >= 0.0 && contamination_pct <= 100.0)) {
    throw ValidationError("contamination must lie in [0, 100]");
  }
}

std::vector<std::vector<double>> gen_linear_covariates(double rho_c, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw ValidationError("need at least one covariate row");
  const double sd = 0.5;  // variance 0.25
  Rng rng(seed, 0);
  std::vector<std::vector<double>> rows;
  rows.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    double base = rng.normal(rho_c, sd);
    while (std::abs(base) < 1e-6) base = rng.normal(rho_c, sd);
    const double x1 = rng.normal(base, sd);
    const double x2 = rng.normal(-rho_c * rho_c / base, sd);
    rows.push_back({x1, x2});
  }
  return rows;
}

LinearSample gen_linear_sample(const LinearScenario& scenario, double theta_star, std::uint64_t seed) {
  scenario.validate();
  const ModelSpec model = linear_model();
  const std::size_t total = scenario.n_proxy_prompts + scenario.n_outcome;
  const auto rows = gen_linear_covariates(scenario.multicollinearity, total, derive_seed(seed, 0));

  // Target task parameter from the learner's N(0, 1) prior, kept inside the support.
  Rng psi_rng(derive_seed(seed, 1));
  double target = psi_rng.normal();
  while (!model.psi_support.sides[0].contains(target)) target = psi_rng.normal();
  const TaskParam psi_target{target};
  // Non-resembling tasks sit at the prior mean.
  const TaskParam psi_other{0.0};
  auto task_for = [&](std::size_t k, std::size_t count) {
    const auto resembling =
        static_cast<std::size_t>(std::llround(scenario.target_resemblance_pct / 100.0 * static_cast<double>(count)));
    return k < resembling ? psi_target : psi_other;
  };

  const SharedParam theta{theta_star};
  Rng outcome_rng(derive_seed(seed, 2));
  std::vector<Observation> prompts;
  std::vector<TaskParam> prompt_psi;
  for (std::size_t k = 0; k < scenario.n_proxy_prompts; ++k) {
    const TaskParam psi = task_for(k, scenario.n_proxy_prompts);
    prompts.push_back(model.simulate(rows[k], std::nullopt, theta, psi, outcome_rng));
    prompt_psi.push_back(psi);
  }
  std::vector<Observation> source;
  std::vector<TaskParam> source_psi;
  for (std::size_t k = 0; k < scenario.n_outcome; ++k) {
    const TaskParam psi = task_for(k, scenario.n_outcome);
    source.push_back(model.simulate(rows[scenario.n_proxy_prompts + k], std::nullopt, theta, psi, outcome_rng));
    source_psi.push_back(psi);
  }
  return LinearSample{SourceData(std::move(source)), std::move(prompts), std::move(prompt_psi),
                      TrueProcess{theta, std::move(source_psi), psi_target}};
}

}  // namespace prompt
