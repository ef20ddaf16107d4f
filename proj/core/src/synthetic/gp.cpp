#include "prompt/errors.hpp"
#include "prompt/synthetic.hpp"

namespace prompt {

void GpScenario::validate() const {
  if (n_trajectories < 2) throw ValidationError("need at least two trajectories");
  if (m_source < 1 || 2 * m_source > n_trajectories) {
    throw ValidationError("m_source must be positive and leave room for as many proxy prompts");
  }
  if (m_target > n_trajectories) throw ValidationError("m_target exceeds the number of trajectories");
  if (resolution < 2) throw ValidationError("resolution must be at least 2");
  if (!(theta_star >= 0.05 && theta_star <= 12.0)) throw ValidationError("theta* must lie in [0.05, 12]");
  if (!(contamination_pct >= 0.0 && contamination_pct <= 100.0)) {
    throw ValidationError("contamination must lie in [0, 100]");
  }
  if (refinement_T < 0 || refinement_T > 10) throw ValidationError("refinement_T must lie in [0, 10]");
}

GpSample gen_gp_trajectories(const GpScenario& scenario, std::uint64_t seed) {
  scenario.validate();
  auto x_grid = linspace(0.0, 1.0, scenario.resolution);
  const ModelSpec model = gp_model(x_grid);
  const Interval box = model.psi_support.sides[0];

  // Task parameters from the Gamma(3, rate 0.8) prior restricted to the support.
  Rng psi_rng(derive_seed(seed, 1));
  auto draw_psi = [&] {
    double v = psi_rng.gamma(3.0, 0.8);
    while (!box.contains(v)) v = psi_rng.gamma(3.0, 0.8);
    return TaskParam{v};
  };
  const TaskParam psi_target = draw_psi();
  std::vector<TaskParam> psi(scenario.n_trajectories);
  for (std::size_t k = 0; k < psi.size(); ++k) psi[k] = k < scenario.m_target ? psi_target : draw_psi();

  const SharedParam theta{scenario.theta_star};
  Rng traj_rng(derive_seed(seed, 2));
  std::vector<Observation> all;
  for (std::size_t k = 0; k < psi.size(); ++k) all.push_back(model.simulate({}, std::nullopt, theta, psi[k], traj_rng));

  std::vector<Observation> prompts(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(scenario.m_source));
  const std::size_t first_source = scenario.n_trajectories - scenario.m_source;
  std::vector<Observation> source(all.begin() + static_cast<std::ptrdiff_t>(first_source), all.end());
  std::vector<TaskParam> source_psi(psi.begin() + static_cast<std::ptrdiff_t>(first_source), psi.end());
  return GpSample{std::move(x_grid), SourceData(std::move(source)), std::move(prompts),
                  TrueProcess{theta, std::move(source_psi), psi_target}};
}

}  // namespace prompt
