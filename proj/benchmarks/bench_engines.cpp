#include <benchmark/benchmark.h>

#include "prompt/diagnostics.hpp"
#include "prompt/harness.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"
#include "prompt/relevance.hpp"
#include "prompt/synthetic.hpp"

namespace {

using namespace prompt;

double std_normal(double v) { return normal_log_pdf(v, 0.0, 1.0); }

struct LinearFixture {
  ModelSpec model = linear_model();
  LinearSample sample;
  ParameterGrid grid;
  ProxyObservation proxy;

  explicit LinearFixture(std::size_t resolution)
      : sample([] {
          LinearScenario scenario;
          scenario.multicollinearity = 2.0;
          return gen_linear_sample(scenario, -1.0, 11);
        }()),
        grid(ParameterGrid::uniform({-10, 10}, resolution, std_normal, {-10, 10}, resolution, std_normal)),
        proxy(gen_expert_proxy(model, grid, sample.prompts, sample.truth.psi_target_star, 0.0, 12).combined) {}
};

void BM_LogLikelihoodTable(benchmark::State& state) {
  const LinearFixture f(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(LogLikelihoodTable(f.model, f.sample.source, f.grid));
}
BENCHMARK(BM_LogLikelihoodTable)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_ClassicPosterior(benchmark::State& state) {
  const LinearFixture f(static_cast<std::size_t>(state.range(0)));
  const LogLikelihoodTable table(f.model, f.sample.source, f.grid);
  for (auto _ : state) benchmark::DoNotOptimize(classic_posterior(table, f.grid, f.grid.psi_prior_mass()));
}
BENCHMARK(BM_ClassicPosterior)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_RefineAndRWeightedPosterior(benchmark::State& state) {
  const LinearFixture f(static_cast<std::size_t>(state.range(0)));
  const LogLikelihoodTable table(f.model, f.sample.source, f.grid);
  RelevanceConfig config;
  for (auto _ : state) {
    const auto refined = refine_relevance(f.model, f.sample.source, f.grid, f.proxy, config);
    benchmark::DoNotOptimize(r_weighted_posterior(table, f.grid, refined.weights_per_psi, f.proxy));
  }
}
BENCHMARK(BM_RefineAndRWeightedPosterior)->Arg(101)->Arg(201)->Unit(benchmark::kMillisecond);

void BM_Metropolis(benchmark::State& state) {
  const LinearFixture f(51);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto weights = [&](const TaskParam&) { return std::vector<double>(f.sample.source.size(), 1.0); };
  const auto prior = [](const SharedParam& t, const TaskParam& p) { return std_normal(t[0]) + std_normal(p[0]); };
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        metropolis_posterior(f.model, f.sample.source, uninformative_proxy(), weights, prior, n, ++seed));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Metropolis)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_ToyDiagnostics(benchmark::State& state) {
  const auto toy = random_toy_instance(5);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_prop55(toy.model, toy.truth, toy.design, toy.grid, toy.weights()));
    benchmark::DoNotOptimize(check_theorem24(toy.model, toy.truth, toy.design, toy.grid, toy.source_psi_prior));
  }
}
BENCHMARK(BM_ToyDiagnostics)->Unit(benchmark::kMicrosecond);

void BM_GpFactorize(benchmark::State& state) {
  const auto x = linspace(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(gp::factorize(x, 1.5, 2.0));
}
BENCHMARK(BM_GpFactorize)->Arg(10)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_LinearSimulation(benchmark::State& state) {
  harness::ExperimentConfig config;
  config.grid_resolution = static_cast<std::size_t>(state.range(0));
  harness::Cell cell;
  cell.multicollinearity = 2.0;
  cell.target_resemblance_pct = 100.0;
  cell.theta_star = -1.0;
  cell.label = "bench";
  std::size_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(harness::run_linear_simulation(config, cell, index++));
}
BENCHMARK(BM_LinearSimulation)->Arg(101)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
