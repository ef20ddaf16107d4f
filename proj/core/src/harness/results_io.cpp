#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prompt/harness.hpp"
#include "prompt/math.hpp"

namespace prompt::harness {
namespace {

constexpr const char* kHeader =
    "seed,ig_classic,ig_rweighted,advantage,cell,sim_index,status,delta_classic,delta_rweighted,"
    "rho_fidelity,ess_dis_expectation,entropy_true,decomposition_residual,"
    "decomposition_residual_mean_scaled,bound_a,bound_b,bound_satisfied";
constexpr std::size_t kColumns = 17;

std::ofstream open_for_write(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields(1);
  for (char c : line) {
    if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

template <class T>
T parse_unsigned(const std::string& text, const std::string& what) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError(what + ": not an unsigned integer: '" + text + "'");
  }
  return value;
}

struct CellSummary {
  std::vector<double> advantage;
  std::vector<double> ig_classic;
  std::vector<double> ig_rweighted;
  std::size_t failures = 0;
};

double mean(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

}  // namespace

std::string format_double(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc()) throw NumericalError("cannot format double");
  return std::string(buffer, ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("not a number: '" + text + "'");
  }
  return value;
}

void emit_csv(const std::vector<SimulationResult>& results, const std::filesystem::path& path) {
  auto out = open_for_write(path);
  out << kHeader << '\n';
  for (const auto& r : results) {
    out << r.seed << ',' << format_double(r.ig_classic) << ',' << format_double(r.ig_rweighted) << ','
        << format_double(r.advantage) << ',' << r.cell << ',' << r.sim_index << ',' << r.status;
    if (r.diagnostics) {
      const auto& d = *r.diagnostics;
      for (double v : {d.delta_classic, d.delta_rweighted, d.rho_fidelity, d.ess_dis_expectation, d.entropy_true,
                       d.decomposition_residual, d.decomposition_residual_mean_scaled, d.bound_a, d.bound_b}) {
        out << ',' << format_double(v);
      }
      out << ',' << (d.bound_satisfied ? "true" : "false");
    } else {
      out << std::string(kColumns - 7, ',');
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<SimulationResult> read_results_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw ParseError(path.string() + ": unexpected header");
  std::vector<SimulationResult> results;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto f = split_fields(line);
    if (f.size() != kColumns) throw ParseError(where + ": expected 17 fields");
    SimulationResult r;
    try {
      r.seed = parse_unsigned<std::uint64_t>(f[0], "seed");
      r.ig_classic = parse_double(f[1]);
      r.ig_rweighted = parse_double(f[2]);
      r.advantage = parse_double(f[3]);
      r.cell = f[4];
      r.sim_index = parse_unsigned<std::size_t>(f[5], "sim_index");
      r.status = f[6];
      if (!f[7].empty()) {
        DiagnosticsReport d;
        d.ig_classic = r.ig_classic;
        d.ig_rweighted = r.ig_rweighted;
        d.delta_classic = parse_double(f[7]);
        d.delta_rweighted = parse_double(f[8]);
        d.rho_fidelity = parse_double(f[9]);
        d.ess_dis_expectation = parse_double(f[10]);
        d.entropy_true = parse_double(f[11]);
        d.decomposition_residual = parse_double(f[12]);
        d.decomposition_residual_mean_scaled = parse_double(f[13]);
        d.bound_a = parse_double(f[14]);
        d.bound_b = parse_double(f[15]);
        if (f[16] != "true" && f[16] != "false") throw ParseError("bound_satisfied must be true or false");
        d.bound_satisfied = f[16] == "true";
        r.diagnostics = d;
      }
    } catch (const ParseError& e) {
      throw ParseError(where + ": " + e.what());
    }
    results.push_back(std::move(r));
  }
  return results;
}

void emit_summary_csv(const std::vector<SimulationResult>& results, const std::filesystem::path& path) {
  std::vector<std::string> order;
  std::map<std::string, CellSummary> cells;
  for (const auto& r : results) {
    auto [it, inserted] = cells.try_emplace(r.cell);
    if (inserted) order.push_back(r.cell);
    if (!r.ok()) {
      ++it->second.failures;
      continue;
    }
    it->second.advantage.push_back(r.advantage);
    it->second.ig_classic.push_back(r.ig_classic);
    it->second.ig_rweighted.push_back(r.ig_rweighted);
  }
  auto out = open_for_write(path);
  out << "cell,n_ok,n_failed,mean_ig_classic,mean_ig_rweighted,mean_advantage,median_advantage,q1_advantage,"
         "q3_advantage,fraction_positive\n";
  for (const auto& label : order) {
    const auto& c = cells.at(label);
    out << label << ',' << c.advantage.size() << ',' << c.failures << ',' << format_double(mean(c.ig_classic))
        << ',' << format_double(mean(c.ig_rweighted)) << ',' << format_double(mean(c.advantage));
    if (c.advantage.empty()) {
      out << ",,,,\n";
      continue;
    }
    auto sorted = c.advantage;
    std::sort(sorted.begin(), sorted.end());
    const auto positive = std::count_if(sorted.begin(), sorted.end(), [](double a) { return a > 0.0; });
    out << ',' << format_double(quantile_type7(sorted, 0.5)) << ',' << format_double(quantile_type7(sorted, 0.25))
        << ',' << format_double(quantile_type7(sorted, 0.75)) << ','
        << format_double(static_cast<double>(positive) / static_cast<double>(c.advantage.size())) << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void emit_metadata(const ExperimentConfig& config, const std::vector<SimulationResult>& results,
                   const std::filesystem::path& path, const std::vector<std::string>& notes) {
  auto out = open_for_write(path);
  out << "experiment: " << to_string(config.experiment) << '\n';
  out << "master_seed: " << config.master_seed << '\n';
  out << "simulations: " << results.size() << '\n';
  const auto failed = std::count_if(results.begin(), results.end(), [](const auto& r) { return !r.ok(); });
  out << "failed: " << failed << '\n';
  std::int64_t total_ms = 0;
  for (const auto& r : results) total_ms += r.wall_time_ms;
  out << "total_wall_time_ms: " << total_ms << '\n';
  out << "\n[notes]\n";
  for (const auto& n : notes) out << "- " << n << '\n';
  out << "\n[simulations]\n";
  for (const auto& r : results) {
    out << r.cell << " #" << r.sim_index << " seed=" << r.seed << " wall_ms=" << r.wall_time_ms
        << " status=" << r.status << '\n';
  }
  out << "\n[config]\n" << config.source_text;
  if (!config.source_text.empty() && config.source_text.back() != '\n') out << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace prompt::harness
