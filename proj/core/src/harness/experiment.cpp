#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

#include "prompt/harness.hpp"
#include "prompt/math.hpp"
#include "prompt/relevance.hpp"
#include "prompt/synthetic.hpp"

namespace prompt::harness {
namespace {

std::string sanitize(std::string text) {
  for (char& ch : text) {
    if (ch == ',' || ch == '\n' || ch == '\r' || ch == '"') ch = ';';
  }
  return text;
}

double log_ratio_at(const PosteriorTable& post, const ParameterGrid& grid, std::size_t t) {
  const double m = post.theta_marginal()[t];
  return (m > 0.0 ? std::log(m) : kNegInf) - std::log(grid.theta_prior_mass()[t]);
}

// Classic and r-weighted log posterior ratios at theta* for one dataset.
void compare_learners(const ModelSpec& model, const SourceData& source, const std::vector<Observation>& prompts,
                      const TrueProcess& truth, const ParameterGrid& grid, double contamination_pct,
                      int refinement_iterations, std::uint64_t proxy_seed, SimulationResult& out) {
  const LogLikelihoodTable table(model, source, grid);
  const std::size_t t = grid.nearest_theta(truth.theta_star);
  out.ig_classic = log_ratio_at(classic_posterior(table, grid, grid.psi_prior_mass()), grid, t);

  const auto expert = gen_expert_proxy(model, grid, prompts, truth.psi_target_star, contamination_pct, proxy_seed);
  RelevanceConfig rc;
  rc.refinement_iterations = refinement_iterations;
  const auto refined = refine_relevance(model, source, grid, table, expert.combined, rc);
  out.ig_rweighted =
      log_ratio_at(r_weighted_posterior(table, grid, refined.weights_per_psi, expert.combined), grid, t);
  out.advantage = out.ig_rweighted - out.ig_classic;
}

}  // namespace

std::uint64_t simulation_seed(std::uint64_t master_seed, std::size_t index) {
  return derive_seed(master_seed, index);
}

std::vector<Cell> expand_cells(const ExperimentConfig& config) {
  std::vector<Cell> cells;
  switch (config.experiment) {
    case ExperimentKind::linear:
      for (double mc : config.multicollinearity) {
        for (double res : config.target_resemblance_pct) {
          for (double cont : config.contamination_pct) {
            Cell c;
            c.multicollinearity = mc;
            c.target_resemblance_pct = res;
            c.contamination_pct = cont;
            c.theta_star = config.theta_values().front();
            c.label = "mc=" + format_double(mc) + ";res=" + format_double(res) + ";cont=" + format_double(cont);
            cells.push_back(c);
          }
        }
      }
      break;
    case ExperimentKind::gp:
      for (double theta : config.theta_values()) {
        for (double cont : config.contamination_pct) {
          Cell c;
          c.theta_star = theta;
          c.contamination_pct = cont;
          c.label = "theta=" + format_double(theta) + ";cont=" + format_double(cont);
          cells.push_back(c);
        }
      }
      break;
    case ExperimentKind::toy_verify:
      cells.push_back(Cell{"toy", 0, 0, 0, 0});
      break;
    case ExperimentKind::smoking:
      throw ConfigurationError("smoking runs through run_smoking_comparison, not the simulation sweep");
  }
  return cells;
}

SimulationResult run_linear_simulation(const ExperimentConfig& config, const Cell& cell, std::size_t index) {
  SimulationResult out;
  out.seed = simulation_seed(config.master_seed, index);
  out.sim_index = index;
  out.cell = cell.label;
  LinearScenario scenario;
  scenario.multicollinearity = cell.multicollinearity;
  scenario.target_resemblance_pct = cell.target_resemblance_pct;
  scenario.contamination_pct = cell.contamination_pct;
  scenario.n_outcome = config.n_outcome;
  scenario.n_proxy_prompts = config.n_proxy_prompts;
  const auto sample = gen_linear_sample(scenario, cell.theta_star, out.seed);

  const ModelSpec model = linear_model();
  const auto std_normal = [](double x) { return normal_log_pdf(x, 0.0, 1.0); };
  const auto grid = ParameterGrid::uniform(model.theta_support.sides[0], config.grid_resolution, std_normal,
                                           model.psi_support.sides[0], config.grid_resolution, std_normal);
  compare_learners(model, sample.source, sample.prompts, sample.truth, grid, cell.contamination_pct,
                   config.refinement_iterations, derive_seed(out.seed, 3), out);
  return out;
}

SimulationResult run_gp_simulation(const ExperimentConfig& config, const Cell& cell, std::size_t index) {
  SimulationResult out;
  out.seed = simulation_seed(config.master_seed, index);
  out.sim_index = index;
  out.cell = cell.label;
  GpScenario scenario;
  scenario.n_trajectories = config.n_trajectories;
  scenario.m_target = config.m_target;
  scenario.m_source = config.m_source;
  scenario.resolution = config.resolution;
  scenario.theta_star = cell.theta_star;
  scenario.contamination_pct = cell.contamination_pct;
  scenario.refinement_T = config.refinement_iterations;
  const auto sample = gen_gp_trajectories(scenario, out.seed);

  const ModelSpec model = gp_model(sample.x_grid);
  const auto grid = ParameterGrid::uniform(
      model.theta_support.sides[0], config.grid_resolution, [](double x) { return lognormal_log_pdf(x, 1.0, 1.0); },
      model.psi_support.sides[0], config.grid_resolution, [](double x) { return gamma_log_pdf(x, 3.0, 0.8); });
  compare_learners(model, sample.source, sample.prompts, sample.truth, grid, cell.contamination_pct,
                   config.refinement_iterations, derive_seed(out.seed, 3), out);
  return out;
}

SimulationResult run_toy_simulation(const ExperimentConfig& config, std::size_t index) {
  SimulationResult out;
  out.seed = simulation_seed(config.master_seed, index);
  out.sim_index = index;
  out.cell = "toy";
  const auto toy = random_toy_instance(out.seed);

  const auto ig_c = info_gain_classic(toy.model, toy.truth, toy.design, toy.grid, toy.source_psi_prior, 1, 0);
  const auto ig_r = info_gain_rweighted(toy.model, toy.truth, toy.design, toy.grid, toy.weights_provider(),
                                        toy.proxy_model(), ProxyExpectation::learner_subjective, 1, 0);
  out.ig_classic = ig_c.value;
  out.ig_rweighted = ig_r.value;
  out.advantage = out.ig_rweighted - out.ig_classic;

  DiagnosticsReport report;
  report.ig_classic = ig_c.value;
  report.ig_rweighted = ig_r.value;
  report.delta_classic = delta_classic(toy.model, toy.truth, toy.design, toy.grid, toy.source_psi_prior).value;
  const auto decomposition = check_prop55(toy.model, toy.truth, toy.design, toy.grid, toy.weights());
  report.delta_rweighted = delta_rweighted(toy.model, toy.truth, toy.design, toy.grid, toy.weights(),
                                           TemperedNormalization::per_instance)
                               .value;
  report.rho_fidelity = decomposition.rho;
  report.ess_dis_expectation = decomposition.ess_dis_expectation;
  report.entropy_true = decomposition.entropy_true;
  report.decomposition_residual = decomposition.residual;
  report.decomposition_residual_mean_scaled = decomposition.residual_mean_scaled;
  const auto bound = check_theorem24(toy.model, toy.truth, toy.design, toy.grid, toy.source_psi_prior);
  report.bound_a = bound.a;
  report.bound_b = bound.b;
  report.bound_satisfied = bound.satisfied;
  out.diagnostics = report;
  return out;
}

std::vector<SimulationResult> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto cells = expand_cells(config);
  const std::size_t total = cells.size() * config.n_simulations;
  std::vector<SimulationResult> results(total);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const Cell& cell = cells[task / config.n_simulations];
      const std::size_t index = task % config.n_simulations;
      const auto start = std::chrono::steady_clock::now();
      SimulationResult r;
      try {
        switch (config.experiment) {
          case ExperimentKind::linear: r = run_linear_simulation(config, cell, index); break;
          case ExperimentKind::gp: r = run_gp_simulation(config, cell, index); break;
          case ExperimentKind::toy_verify: r = run_toy_simulation(config, index); break;
          case ExperimentKind::smoking: break;
        }
      } catch (const std::exception& e) {
        r = SimulationResult{};
        r.seed = simulation_seed(config.master_seed, index);
        r.sim_index = index;
        r.cell = cell.label;
        r.ig_classic = r.ig_rweighted = r.advantage = std::nan("");
        r.status = "error: " + sanitize(e.what());
      }
      r.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      results[task] = std::move(r);
    }
  };
  const std::size_t threads = std::min(config.parallelism, total);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return results;
}

void check_failure_threshold(const std::vector<SimulationResult>& results) {
  std::size_t failed = 0;
  for (const auto& r : results) failed += !r.ok();
  if (results.empty()) return;
  const double fraction = static_cast<double>(failed) / static_cast<double>(results.size());
  if (fraction > kMaxFailureFraction) {
    throw FailureThresholdError(std::to_string(failed) + " of " + std::to_string(results.size()) +
                                " simulations failed");
  }
}

}  // namespace prompt::harness
