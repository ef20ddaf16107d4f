#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "prompt/harness.hpp"

namespace fs = std::filesystem;
using namespace prompt;
using namespace prompt::harness;

namespace {

struct CommonFlags {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  std::optional<std::size_t> grid;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--seed", flags.seed, "Master seed");
  cmd->add_option("--out", flags.out, "Output directory (plot: output SVG path)");
  cmd->add_option("--jobs", flags.jobs, "Parallel simulations")->check(CLI::PositiveNumber);
  cmd->add_option("--grid", flags.grid, "Grid resolution per parameter axis")->check(CLI::Range(2, 100000));
}

void apply(const CommonFlags& flags, ExperimentConfig& config) {
  if (flags.seed) config.master_seed = *flags.seed;
  if (flags.out) config.output_dir = *flags.out;
  if (flags.jobs) config.parallelism = *flags.jobs;
  if (flags.grid) config.grid_resolution = *flags.grid;
  config.validate();
}

std::string title_of(const ExperimentConfig& config) {
  return to_string(config.experiment) + " experiment, seed " + std::to_string(config.master_seed);
}

int run_sweep(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  const auto results = run_experiment(config);
  emit_csv(results, dir / "results.csv");
  emit_summary_csv(results, dir / "summary.csv");
  emit_metadata(config, results, dir / "metadata.txt");
  const auto groups = group_by_cell(results);
  if (!groups.empty()) emit_boxplot_svg(groups, dir / "advantage.svg", title_of(config), "IG^R - IG^c");
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.ok() ? 0 : 1;
  std::cout << "wrote " << results.size() << " results (" << failed << " failed) to " << dir.string() << '\n';
  check_failure_threshold(results);
  return 0;
}

int run_smoking(const ExperimentConfig& config) {
  const fs::path dir = config.output_dir;
  std::vector<std::string> notes{
      "classic baseline: known-groups fixed-effects model sampled with the built-in random-walk Metropolis "
      "sampler instead of an external sampler"};
  const auto records = ingest_smoking_csv(config.smoking_csv, &notes);
  SmokingOptions options;
  options.n_samples = config.mcmc_samples;
  const auto intercepts = fit_study_intercepts(records, derive_seed(config.master_seed, 1000), options, &notes);
  std::vector<Group> groups;
  for (ProxyMode mode : config.proxy_modes) {
    const auto results = run_smoking_comparison(records, mode, config.master_seed, options, intercepts);
    fs::create_directories(dir);
    emit_smoking_csv(results, dir / ("smoking_" + to_string(mode) + ".csv"));
    Group g{to_string(mode), {}};
    for (const auto& r : results) g.second.push_back(r.log_ratio);
    groups.push_back(std::move(g));
    std::cout << "proxy " << to_string(mode) << ": " << results.size() << " partitions\n";
  }
  emit_boxplot_svg(groups, dir / "smoking.svg", "held-out log predictive ratio", "log p^R / p");
  emit_metadata(config, {}, dir / "metadata.txt", notes);
  return 0;
}

int dispatch(const ExperimentConfig& config) {
  return config.experiment == ExperimentKind::smoking ? run_smoking(config) : run_sweep(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proxy-informed robust transfer learning experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string config_path;
  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "Config file")->required();
  add_common(run, run_flags);

  CommonFlags verify_flags;
  std::size_t verify_n = 100;
  auto* verify = app.add_subcommand("verify", "Check the diagnostics identities on random discrete instances");
  verify->add_option("-n,--instances", verify_n, "Number of random instances")->check(CLI::PositiveNumber);
  add_common(verify, verify_flags);

  CommonFlags smoking_flags;
  std::string csv_path;
  std::string mode = "all";
  std::size_t samples = 20000;
  auto* smoking = app.add_subcommand("smoking", "Leave-one-study-out comparison on smoking cessation data");
  smoking->add_option("csv", csv_path, "study,treatment,events,total CSV")->required();
  smoking->add_option("--mode", mode, "Proxy mode")->check(CLI::IsMember({"weak", "strong", "misleading", "all"}));
  smoking->add_option("--samples", samples, "Metropolis samples kept per chain")->check(CLI::Range(1000, 10000000));
  add_common(smoking, smoking_flags);

  std::string plot_in;
  std::string plot_out;
  std::string plot_title;
  auto* plot = app.add_subcommand("plot", "Boxplot of advantage per cell from a results CSV");
  plot->add_option("csv", plot_in, "results.csv")->required();
  plot->add_option("--out", plot_out, "Output SVG (default: next to the CSV)");
  plot->add_option("--title", plot_title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      auto config = load_config(config_path);
      apply(run_flags, config);
      return dispatch(config);
    }
    if (*verify) {
      ExperimentConfig config;
      config.experiment = ExperimentKind::toy_verify;
      config.n_simulations = verify_n;
      config.output_dir = "verify";
      config.source_text = "{\"experiment\": \"toy-verify\", \"n_simulations\": " + std::to_string(verify_n) + "}\n";
      apply(verify_flags, config);
      return run_sweep(config);
    }
    if (*smoking) {
      ExperimentConfig config;
      config.experiment = ExperimentKind::smoking;
      config.smoking_csv = csv_path;
      config.mcmc_samples = samples;
      config.output_dir = "smoking";
      if (mode != "all") config.proxy_modes = {proxy_mode_from_string(mode)};
      config.source_text = "{\"experiment\": \"smoking\", \"smoking_csv\": \"" + csv_path + "\", \"proxy_mode\": \"" +
                           mode + "\", \"mcmc_samples\": " + std::to_string(samples) + "}\n";
      apply(smoking_flags, config);
      return dispatch(config);
    }
    if (*plot) {
      const auto results = read_results_csv(plot_in);
      const fs::path out = plot_out.empty() ? fs::path(plot_in).replace_extension(".svg") : fs::path(plot_out);
      emit_boxplot_svg(group_by_cell(results), out, plot_title, "IG^R - IG^c");
      std::cout << "wrote " << out.string() << '\n';
      return 0;
    }
  } catch (const FailureThresholdError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
