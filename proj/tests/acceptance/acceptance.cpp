// Runs every acceptance criterion at its pinned tolerance and prints one
// PASS/FAIL line per criterion. Exits nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "prompt/diagnostics.hpp"
#include "prompt/harness.hpp"
#include "prompt/synthetic.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace prompt;
using namespace prompt::harness;

namespace {

constexpr std::uint64_t kAcceptanceSeed = 2024;
constexpr std::size_t kToyInstances = 100;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // <= 0: no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

std::vector<ToyInstance> toy_instances() {
  std::vector<ToyInstance> out;
  out.reserve(kToyInstances);
  for (std::size_t k = 0; k < kToyInstances; ++k) out.push_back(random_toy_instance(derive_seed(kAcceptanceSeed, k)));
  return out;
}

Outcome decomposition_identity() {
  double worst = 0.0;
  double worst_scaled = 0.0;
  std::size_t failing = 0;
  for (const auto& toy : toy_instances()) {
    const auto check = check_prop55(toy.model, toy.truth, toy.design, toy.grid, toy.weights());
    worst = std::max(worst, std::abs(check.residual));
    worst_scaled = std::max(worst_scaled, std::abs(check.residual_mean_scaled));
    failing += std::abs(check.residual) >= 1e-9;
  }
  return {worst < 1e-9, "max |Delta^R - (E[ESS*DIS] - n*rho - H)| = " + fmt(worst) + " (" + std::to_string(failing) +
                            "/100 instances >= 1e-9); with E[ESS*DIS]/n the max residual is " + fmt(worst_scaled)};
}

Outcome information_bound() {
  std::size_t violations = 0;
  std::size_t degenerate = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  for (const auto& toy : toy_instances()) {
    const auto bound = check_theorem24(toy.model, toy.truth, toy.design, toy.grid, toy.source_psi_prior);
    if (bound.degenerate) {
      ++degenerate;
      continue;
    }
    const double slack = bound.a * (bound.b - bound.delta_classic) + 1e-12 - bound.ig_classic;
    worst_slack = std::min(worst_slack, slack);
    violations += slack < 0.0;
  }
  return {violations == 0, std::to_string(violations) + " violations, " + std::to_string(degenerate) +
                               " degenerate, smallest slack " + fmt(worst_slack)};
}

Outcome engine_cross_validation() {
  bool pass = true;
  std::string detail;
  for (const auto& [name, gap] : test_support::engine_equivalence_all_models()) {
    pass = pass && gap < 1e-10;
    detail += name + " gap " + fmt(gap) + "; ";
  }
  const auto chain = test_support::metropolis_grid_tv(200000, derive_seed(kAcceptanceSeed, 3));
  pass = pass && chain.tv < 0.05;
  detail += "Metropolis TV " + fmt(chain.tv);
  return {pass, detail};
}

Outcome metropolis_oracle() {
  const auto chain = test_support::metropolis_grid_tv(200000, derive_seed(kAcceptanceSeed, 4));
  return {chain.tv < 0.05, "TV " + fmt(chain.tv) + " at 2e5 samples, acceptance " + fmt(chain.acceptance)};
}

// Median advantage per cell, in sweep order.
struct CellMedian {
  Cell cell;
  double median = 0.0;
  std::size_t failed = 0;
};

std::vector<CellMedian> cell_medians(const ExperimentConfig& config) {
  const auto results = run_experiment(config);
  std::vector<CellMedian> out;
  for (const auto& cell : expand_cells(config)) {
    CellMedian m{cell, std::nan(""), 0};
    std::vector<double> values;
    for (const auto& r : results) {
      if (r.cell != cell.label) continue;
      if (r.ok()) {
        values.push_back(r.advantage);
      } else {
        ++m.failed;
      }
    }
    if (!values.empty()) m.median = box_stats(values).median;
    out.push_back(m);
  }
  return out;
}

ExperimentConfig acceptance_config(const std::string& file) {
  auto config = load_config(fs::path(PROMPT_CONFIG_DIR) / file);
  config.n_simulations = 50;
  config.master_seed = kAcceptanceSeed;
  config.grid_resolution = 101;
  config.parallelism = 1;
  return config;
}

std::string describe(const CellMedian& m) {
  return m.cell.label + " median " + fmt(m.median) + (m.failed ? " (" + std::to_string(m.failed) + " failed)" : "");
}

Outcome linear_multicollinearity() {
  auto config = acceptance_config("linear_multicollinearity.json");
  config.multicollinearity = {0.0, 2.0};
  config.target_resemblance_pct = {100.0};
  const auto medians = cell_medians(config);
  const auto& none = medians.at(0);
  const auto& strong = medians.at(1);
  const bool pass = strong.median > 0.0 && std::abs(none.median) < strong.median;
  return {pass, describe(none) + "; " + describe(strong)};
}

Outcome linear_contamination() {
  auto config = acceptance_config("linear_contamination.json");
  config.multicollinearity = {2.0};
  config.target_resemblance_pct = {100.0};
  config.contamination_pct = {0.0, 25.0, 50.0, 75.0};
  bool pass = true;
  std::string detail;
  for (const auto& m : cell_medians(config)) {
    pass = pass && m.median > 0.0;
    detail += describe(m) + "; ";
  }
  return {pass, detail};
}

Outcome gp_left_tail() {
  auto config = acceptance_config("gp.json");
  config.theta_star = {1.0};
  config.n_trajectories = 24;
  config.resolution = 10;
  const auto medians = cell_medians(config);
  return {medians.at(0).median > 0.0, describe(medians.at(0))};
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const auto dir = fs::temp_directory_path() / "prompt_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig toy;
    toy.experiment = ExperimentKind::toy_verify;
    toy.n_simulations = 40;
    configs.push_back(toy);
    auto linear = acceptance_config("linear_multicollinearity.json");
    linear.n_simulations = 4;
    linear.grid_resolution = 41;
    configs.push_back(linear);
    auto gp = acceptance_config("gp.json");
    gp.n_simulations = 3;
    gp.grid_resolution = 31;
    configs.push_back(gp);
  }
  bool pass = true;
  std::string detail;
  for (auto& config : configs) {
    std::string reference;
    for (std::size_t jobs : {1u, 3u, 8u}) {
      config.parallelism = jobs;
      const auto path = dir / (to_string(config.experiment) + "_" + std::to_string(jobs) + ".csv");
      emit_csv(run_experiment(config), path);
      const auto bytes = slurp(path);
      if (jobs == 1) {
        reference = bytes;
      } else if (bytes != reference) {
        pass = false;
        detail += to_string(config.experiment) + " differs at jobs " + std::to_string(jobs) + "; ";
      }
    }
    detail += to_string(config.experiment) + " " + std::to_string(reference.size()) + " bytes; ";
  }
  fs::remove_all(dir);
  return {pass, detail + "jobs 1/3/8 compared"};
}

Outcome property_suites() {
  const std::string command = std::string(UNIT_TESTS_PATH) + " --gtest_brief=1 > " +
                              (fs::temp_directory_path() / "prompt_acceptance_unit.log").string() + " 2>&1";
  const int status = std::system(command.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code == 0, "unit suite exit code " + std::to_string(code)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "decomposition identity on 100 random toy instances", 30, decomposition_identity},
      {2, "information-gain bound on 100 random toy instances", 60, information_bound},
      {3, "engine cross-validation on all four models", 0, engine_cross_validation},
      {4, "Metropolis histogram vs grid posterior", 300, metropolis_oracle},
      {5, "linear multicollinearity direction", 900, linear_multicollinearity},
      {6, "linear robustness to proxy contamination", 1800, linear_contamination},
      {7, "GP advantage at theta* = 1", 1800, gp_left_tail},
      {8, "determinism across --jobs", 0, determinism},
      {9, "full unit property suite", 300, property_suites},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && seconds >= c.time_limit_s) {
      outcome.pass = false;
      outcome.detail += "; runtime limit " + fmt(c.time_limit_s) + " s exceeded";
    }
    failed += !outcome.pass;
    std::printf("[%s] criterion %d: %s | %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title.c_str(),
                outcome.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
