#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "prompt/harness.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"
#include "prompt/relevance.hpp"
#include "prompt/synthetic.hpp"

namespace prompt::harness {
namespace {

constexpr double kPriorSd = 3.0;
constexpr std::size_t kExpectedStudies = 24;
// Stepping-stone stages for the r-weighted held-out predictive; each stage
// keeps n_samples / kTemperingStages draws.
constexpr std::size_t kTemperingStages = 8;

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

int parse_int(const std::string& text, const std::string& column, std::size_t line) {
  int value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw ParseError("line " + std::to_string(line) + ": column '" + column + "' is not an integer: '" + text + "'");
  }
  return value;
}

Observation arm_observation(const SmokingRecord& r) {
  std::vector<double> x(4, 0.0);
  x[static_cast<std::size_t>(r.treatment - 'A')] = 1.0;
  return Observation{std::move(x), {static_cast<double>(r.events)}, r.total};
}

double prior_log_density(std::span<const double> v) {
  double lp = 0.0;
  for (double x : v) lp += normal_log_pdf(x, 0.0, kPriorSd);
  return lp;
}

struct Partition {
  SourceData source;
  std::vector<Observation> target;
  Groups groups;
};

// Observations grouped by study, in first-appearance order.
struct StudyTable {
  std::vector<std::string> ids;
  std::vector<std::vector<Observation>> arms;
};

StudyTable by_study(const std::vector<SmokingRecord>& records) {
  StudyTable table;
  std::map<std::string, std::size_t> index;
  for (const auto& r : records) {
    auto [it, inserted] = index.emplace(r.study_id, table.ids.size());
    if (inserted) {
      table.ids.push_back(r.study_id);
      table.arms.emplace_back();
    }
    table.arms[it->second].push_back(arm_observation(r));
  }
  return table;
}

Partition leave_out(const StudyTable& table, std::size_t held_out) {
  std::vector<Observation> obs;
  Partition part{SourceData({Observation{{0, 0, 0, 0}, {0}, 1}}), table.arms[held_out], {}};
  for (std::size_t s = 0; s < table.ids.size(); ++s) {
    if (s == held_out) continue;
    std::vector<std::size_t> group;
    for (const auto& arm : table.arms[s]) {
      group.push_back(obs.size());
      obs.push_back(arm);
    }
    part.groups.push_back(std::move(group));
  }
  part.source = SourceData(std::move(obs));
  return part;
}

double pooled_logit(const std::vector<Observation>& arms) {
  double events = 0.0;
  double total = 0.0;
  for (const auto& a : arms) {
    events += a.value();
    total += *a.trial_count;
  }
  const double p = std::clamp((events + 0.5) / (total + 1.0), 1e-3, 1.0 - 1e-3);
  return std::log(p / (1.0 - p));
}

double held_out_log_likelihood(const ModelSpec& model, const std::vector<Observation>& target,
                               const SharedParam& theta, const TaskParam& psi) {
  double total = 0.0;
  for (const auto& arm : target) total += model.log_likelihood(arm, theta, psi);
  return total;
}

MetropolisOptions chain_options(std::size_t dim) {
  MetropolisOptions o;
  o.initial_scales.assign(dim, 0.1);
  return o;
}

}  // namespace

std::vector<SmokingRecord> parse_smoking_csv(const std::string& text, std::vector<std::string>* warnings) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(trim(line));
      break;
    }
  }
  if (header.empty()) throw ValidationError("smoking data: empty input");
  for (auto& h : header) h = trim(h);
  std::map<std::string, std::size_t> column;
  for (std::size_t k = 0; k < header.size(); ++k) column[header[k]] = k;
  for (const char* required : {"study", "treatment", "events", "total"}) {
    if (!column.count(required)) throw ParseError("smoking data: missing column '" + std::string(required) + "'");
  }

  std::vector<SmokingRecord> records;
  std::map<std::pair<std::string, char>, std::size_t> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(trim(line));
    if (fields.size() != header.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    SmokingRecord r;
    r.study_id = fields[column["study"]];
    if (r.study_id.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty study id");
    const auto& treatment = fields[column["treatment"]];
    if (treatment.size() != 1 || treatment[0] < 'A' || treatment[0] > 'D') {
      throw ParseError("line " + std::to_string(line_no) + ": treatment must be one of A, B, C, D");
    }
    r.treatment = treatment[0];
    r.events = parse_int(fields[column["events"]], "events", line_no);
    r.total = parse_int(fields[column["total"]], "total", line_no);
    if (r.events < 0) throw ValidationError("line " + std::to_string(line_no) + ": events must be nonnegative");
    if (r.total < 1) throw ValidationError("line " + std::to_string(line_no) + ": total must be positive");
    if (r.events > r.total) throw ValidationError("line " + std::to_string(line_no) + ": events exceed total");
    if (!seen.emplace(std::make_pair(r.study_id, r.treatment), line_no).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate arm for study " + r.study_id);
    }
    records.push_back(std::move(r));
  }
  if (records.empty()) throw ValidationError("smoking data: empty input");
  const auto studies = study_ids(records).size();
  if (studies != kExpectedStudies && warnings) {
    warnings->push_back("expected 24 studies, found " + std::to_string(studies));
  }
  return records;
}

std::vector<SmokingRecord> ingest_smoking_csv(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_smoking_csv(text.str(), warnings);
}

std::vector<std::string> study_ids(const std::vector<SmokingRecord>& records) {
  return by_study(records).ids;
}

std::vector<double> fit_study_intercepts(const std::vector<SmokingRecord>& records, std::uint64_t seed,
                                         const SmokingOptions& options, std::vector<std::string>* warnings) {
  const auto table = by_study(records);
  const ModelSpec model = binomial_logit_model();
  std::vector<Observation> obs;
  Groups groups;
  for (const auto& arms : table.arms) {
    std::vector<std::size_t> group;
    for (const auto& a : arms) {
      group.push_back(obs.size());
      obs.push_back(a);
    }
    groups.push_back(std::move(group));
  }
  const SourceData data(std::move(obs));
  const auto target = known_groups_log_target(model, data, groups, prior_log_density);
  const std::size_t dim = 4 + groups.size();
  auto opts = chain_options(dim);
  opts.n_samples = options.n_samples;
  opts.seed = seed;
  opts.initial.assign(4, 0.0);
  for (const auto& arms : table.arms) opts.initial.push_back(pooled_logit(arms));
  const auto chain = metropolis(target, Box::cube(dim, -10.0, 10.0), 4, opts);
  if (warnings) {
    for (const auto& w : chain.warnings) warnings->push_back("all-data fit: " + w);
  }
  std::vector<double> means;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const auto col = chain.column(4 + g);
    double total = 0.0;
    for (double v : col) total += v;
    means.push_back(total / static_cast<double>(col.size()));
  }
  return means;
}

std::vector<PartitionResult> run_smoking_comparison(const std::vector<SmokingRecord>& records, ProxyMode mode,
                                                    std::uint64_t seed, const SmokingOptions& options,
                                                    std::optional<std::vector<double>> intercepts) {
  const auto table = by_study(records);
  if (table.ids.size() < 2) throw ValidationError("smoking comparison needs at least two studies");
  std::vector<std::string> fit_warnings;
  if (!intercepts) intercepts = fit_study_intercepts(records, derive_seed(seed, 1000), options, &fit_warnings);
  if (intercepts->size() != table.ids.size()) throw ValidationError("need one intercept per study");

  const double sigma = mode == ProxyMode::strong ? 0.1 : 3.0;
  const bool biased = mode == ProxyMode::misleading;
  const ModelSpec model = binomial_logit_model();
  const std::uint64_t chain_seed = options.chain_seed.value_or(seed);

  std::vector<PartitionResult> results;
  for (std::size_t h = 0; h < table.ids.size(); ++h) {
    const auto part = leave_out(table, h);
    PartitionResult r;
    r.held_out_study = table.ids[h];
    r.mode = mode;
    r.psi_target = (*intercepts)[h];
    r.warnings = fit_warnings;
    // Same base draw for every mode; the misleading mode adds its bias on top.
    const auto proxy = gen_imprecise_estimate_proxy(r.psi_target, sigma, biased, derive_seed(seed, 5000 + h));
    r.proxy_value = proxy.proxy.payload[0];

    // r-weighted learner over (theta, psi_target)
    const auto weights_fn = [&](const TaskParam& psi) {
      return sigmoid_ratio_relevance(model, part.source, psi).weights;
    };
    const auto prior = [](const SharedParam& theta, const TaskParam& psi) {
      return prior_log_density(theta.span()) + prior_log_density(psi.span());
    };
    auto r_opts = chain_options(5);
    r_opts.initial = {0.0, 0.0, 0.0, 0.0, std::clamp(r.proxy_value, -9.0, 9.0)};
    r_opts.n_samples = std::max<std::size_t>(1000, options.n_samples / kTemperingStages);
    r_opts.seed = derive_seed(chain_seed, 2 * h);
    Box support = model.theta_support;
    support.sides.insert(support.sides.end(), model.psi_support.sides.begin(), model.psi_support.sides.end());
    const auto held_out = [&](std::span<const double> v) {
      const SharedParam theta(std::vector<double>(v.begin(), v.begin() + 4));
      const TaskParam psi{v[4]};
      return held_out_log_likelihood(model, part.target, theta, psi);
    };
    const auto r_estimate =
        tempered_log_expectation(r_weighted_log_target(model, part.source, proxy.proxy, weights_fn, prior),
                                 held_out, support, 4, r_opts, kTemperingStages);
    r.acceptance_rweighted = r_estimate.acceptance_rate;
    for (const auto& w : r_estimate.warnings) r.warnings.push_back("r-weighted chain: " + w);
    r.lpd_rweighted = r_estimate.value;
    r.se_rweighted = r_estimate.std_error;

    // classic learner: fixed effects with known study membership; the target
    // intercept comes from the conjugate normal update on the proxy alone.
    const std::size_t dim = 4 + part.groups.size();
    auto c_opts = chain_options(dim);
    c_opts.n_samples = options.n_samples;
    c_opts.seed = derive_seed(chain_seed, 2 * h + 1);
    c_opts.initial.assign(4, 0.0);
    for (std::size_t s = 0; s < table.ids.size(); ++s) {
      if (s != h) c_opts.initial.push_back(pooled_logit(table.arms[s]));
    }
    const auto c_chain = metropolis(known_groups_log_target(model, part.source, part.groups, prior_log_density),
                                    Box::cube(dim, -10.0, 10.0), 4, c_opts);
    r.acceptance_classic = c_chain.acceptance_rate;
    for (const auto& w : c_chain.warnings) r.warnings.push_back("classic chain: " + w);
    const double post_var = 1.0 / (1.0 / (kPriorSd * kPriorSd) + 1.0 / (sigma * sigma));
    const double post_mean = post_var * r.proxy_value / (sigma * sigma);
    Rng psi_rng(derive_seed(chain_seed, 9000 + h));
    std::vector<double> lik(c_chain.size());
    for (std::size_t k = 0; k < lik.size(); ++k) {
      const auto s = c_chain.sample(k);
      const SharedParam theta(std::vector<double>(s.begin(), s.begin() + 4));
      const TaskParam psi{psi_rng.normal(post_mean, std::sqrt(post_var))};
      lik[k] = held_out_log_likelihood(model, part.target, theta, psi);
    }
    const auto c_estimate = log_mean_exp(lik);
    r.lpd_classic = c_estimate.value;
    r.se_classic = c_estimate.std_error;

    r.log_ratio = r.lpd_rweighted - r.lpd_classic;
    r.std_error = std::hypot(r.se_rweighted, r.se_classic);
    results.push_back(std::move(r));
  }
  return results;
}

void emit_smoking_csv(const std::vector<PartitionResult>& results, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "held_out_study,proxy_mode,log_ratio,std_error,lpd_rweighted,lpd_classic,se_rweighted,se_classic,"
         "psi_target,proxy_value,acceptance_rweighted,acceptance_classic,warnings\n";
  for (const auto& r : results) {
    std::string warnings;
    for (const auto& w : r.warnings) {
      if (!warnings.empty()) warnings += " | ";
      warnings += w;
    }
    std::replace(warnings.begin(), warnings.end(), ',', ';');
    out << r.held_out_study << ',' << to_string(r.mode) << ',' << format_double(r.log_ratio) << ','
        << format_double(r.std_error) << ',' << format_double(r.lpd_rweighted) << ','
        << format_double(r.lpd_classic) << ',' << format_double(r.se_rweighted) << ','
        << format_double(r.se_classic) << ',' << format_double(r.psi_target) << ','
        << format_double(r.proxy_value) << ',' << format_double(r.acceptance_rweighted) << ','
        << format_double(r.acceptance_classic) << ',' << warnings << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace prompt::harness
