#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "prompt/diagnostics.hpp"
#include "prompt/errors.hpp"

namespace prompt::harness {

enum class ExperimentKind { linear, gp, smoking, toy_verify };
enum class ProxyMode { weak, strong, misleading };

std::string to_string(ExperimentKind kind);
std::string to_string(ProxyMode mode);
ProxyMode proxy_mode_from_string(const std::string& name);

// Declarative experiment description. Keys marked "sweep" accept a single
// value or a list; the run covers the cartesian product of all sweep lists.
struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::linear;
  std::size_t n_simulations = 50;
  std::uint64_t master_seed = 1;
  std::size_t grid_resolution = 201;
  std::string output_dir = "results";
  std::size_t parallelism = 1;
  int refinement_iterations = 3;

  // linear (sweep)
  std::vector<double> multicollinearity{2.0};
  std::vector<double> target_resemblance_pct{100.0};
  std::vector<double> contamination_pct{0.0};
  std::size_t n_outcome = 75;
  std::size_t n_proxy_prompts = 25;

  // gp; theta_star is a sweep for gp and a single value for linear
  std::vector<double> theta_star;
  std::size_t n_trajectories = 24;
  std::size_t m_target = 12;
  std::size_t m_source = 8;
  std::size_t resolution = 10;

  // smoking
  std::string smoking_csv;
  std::vector<ProxyMode> proxy_modes{ProxyMode::weak, ProxyMode::strong, ProxyMode::misleading};
  std::size_t mcmc_samples = 20000;

  // Original text, echoed into the run metadata.
  std::string source_text;

  void validate() const;
  std::vector<double> theta_values() const;
};

// Parses JSON-with-comments text; unknown keys are errors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// One parameter combination of a sweep.
struct Cell {
  std::string label;
  double multicollinearity = 0.0;
  double target_resemblance_pct = 0.0;
  double contamination_pct = 0.0;
  double theta_star = 0.0;
};
std::vector<Cell> expand_cells(const ExperimentConfig& config);

struct SimulationResult {
  std::uint64_t seed = 0;
  double ig_classic = 0.0;
  double ig_rweighted = 0.0;
  double advantage = 0.0;  // ig_rweighted - ig_classic
  std::string cell;
  std::size_t sim_index = 0;
  std::string status = "ok";
  std::optional<DiagnosticsReport> diagnostics;
  std::int64_t wall_time_ms = 0;  // kept out of the CSV

  bool ok() const { return status == "ok"; }
};

// Seed of simulation i; identical across cells so cells are paired.
std::uint64_t simulation_seed(std::uint64_t master_seed, std::size_t index);

// Runs every (cell, simulation) pair on `parallelism` threads. Failures are
// recorded per simulation; results are ordered by cell then index.
std::vector<SimulationResult> run_experiment(const ExperimentConfig& config);

SimulationResult run_linear_simulation(const ExperimentConfig& config, const Cell& cell, std::size_t index);
SimulationResult run_gp_simulation(const ExperimentConfig& config, const Cell& cell, std::size_t index);
SimulationResult run_toy_simulation(const ExperimentConfig& config, std::size_t index);

// Thrown when more than 20% of simulations failed.
class FailureThresholdError : public Error {
 public:
  using Error::Error;
};
inline constexpr double kMaxFailureFraction = 0.2;
void check_failure_threshold(const std::vector<SimulationResult>& results);

// --- smoking -------------------------------------------------------------

struct SmokingRecord {
  std::string study_id;
  char treatment = 'A';  // A..D
  int events = 0;
  int total = 1;
};

// Reads `study,treatment,events,total`; errors name the offending line.
// A study count other than 24 is reported through `warnings`.
std::vector<SmokingRecord> ingest_smoking_csv(const std::filesystem::path& path,
                                              std::vector<std::string>* warnings = nullptr);
std::vector<SmokingRecord> parse_smoking_csv(const std::string& text, std::vector<std::string>* warnings = nullptr);
std::vector<std::string> study_ids(const std::vector<SmokingRecord>& records);

struct SmokingOptions {
  std::size_t n_samples = 20000;
  // Reseeds only the Metropolis chains, keeping proxies fixed; used to
  // measure Monte Carlo spread between reruns.
  std::optional<std::uint64_t> chain_seed;
};

struct PartitionResult {
  std::string held_out_study;
  ProxyMode mode = ProxyMode::weak;
  double log_ratio = 0.0;  // log p^R(d_target | d, z) - log p(d_target | d, z)
  double std_error = 0.0;
  double lpd_rweighted = 0.0;
  double lpd_classic = 0.0;
  double se_rweighted = 0.0;
  double se_classic = 0.0;
  double psi_target = 0.0;  // all-data estimate used to generate the proxy
  double proxy_value = 0.0;
  double acceptance_rweighted = 0.0;
  double acceptance_classic = 0.0;
  std::vector<std::string> warnings;
};

// Posterior-mean study intercepts from a fixed-effects fit to every study.
std::vector<double> fit_study_intercepts(const std::vector<SmokingRecord>& records, std::uint64_t seed,
                                         const SmokingOptions& options, std::vector<std::string>* warnings = nullptr);

// Leave-one-study-out comparison of the r-weighted and classic learners.
// `intercepts` defaults to fit_study_intercepts(records, seed).
std::vector<PartitionResult> run_smoking_comparison(const std::vector<SmokingRecord>& records, ProxyMode mode,
                                                    std::uint64_t seed, const SmokingOptions& options = {},
                                                    std::optional<std::vector<double>> intercepts = std::nullopt);

void emit_smoking_csv(const std::vector<PartitionResult>& results, const std::filesystem::path& path);

// --- output ----------------------------------------------------------------

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(const std::string& text);

void emit_csv(const std::vector<SimulationResult>& results, const std::filesystem::path& path);
std::vector<SimulationResult> read_results_csv(const std::filesystem::path& path);
void emit_summary_csv(const std::vector<SimulationResult>& results, const std::filesystem::path& path);
void emit_metadata(const ExperimentConfig& config, const std::vector<SimulationResult>& results,
                   const std::filesystem::path& path, const std::vector<std::string>& notes = {});

// Type-7 quartiles and Tukey whiskers.
struct BoxStats {
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;
  double whisker_high = 0.0;
  std::vector<double> outliers;
  std::size_t count = 0;
};
BoxStats box_stats(std::vector<double> values);

using Group = std::pair<std::string, std::vector<double>>;
std::string boxplot_svg(const std::vector<Group>& groups, const std::string& title, const std::string& y_label);
void emit_boxplot_svg(const std::vector<Group>& groups, const std::filesystem::path& path,
                      const std::string& title = "", const std::string& y_label = "");

// Advantage values grouped by cell in first-appearance order, failures skipped.
std::vector<Group> group_by_cell(const std::vector<SimulationResult>& results);

}  // namespace prompt::harness
