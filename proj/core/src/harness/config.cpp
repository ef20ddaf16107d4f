#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "prompt/harness.hpp"

namespace prompt::harness {

using nlohmann::json;

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::linear: return "linear";
    case ExperimentKind::gp: return "gp";
    case ExperimentKind::smoking: return "smoking";
    case ExperimentKind::toy_verify: return "toy-verify";
  }
  return "?";
}

std::string to_string(ProxyMode mode) {
  switch (mode) {
    case ProxyMode::weak: return "weak";
    case ProxyMode::strong: return "strong";
    case ProxyMode::misleading: return "misleading";
  }
  return "?";
}

ProxyMode proxy_mode_from_string(const std::string& name) {
  if (name == "weak") return ProxyMode::weak;
  if (name == "strong") return ProxyMode::strong;
  if (name == "misleading") return ProxyMode::misleading;
  throw ValidationError("unknown proxy mode '" + name + "' (expected weak, strong or misleading)");
}

namespace {

ExperimentKind kind_from_string(const std::string& name) {
  if (name == "linear") return ExperimentKind::linear;
  if (name == "gp") return ExperimentKind::gp;
  if (name == "smoking") return ExperimentKind::smoking;
  if (name == "toy-verify") return ExperimentKind::toy_verify;
  throw ValidationError("unknown experiment '" + name + "' (expected linear, gp, smoking or toy-verify)");
}

const std::set<std::string> kCommonKeys{"experiment",  "n_simulations", "master_seed",          "grid_resolution",
                                        "output_dir",  "parallelism",   "refinement_iterations"};

std::set<std::string> keys_for(ExperimentKind kind) {
  std::set<std::string> keys = kCommonKeys;
  switch (kind) {
    case ExperimentKind::linear:
      keys.insert({"multicollinearity", "target_resemblance_pct", "contamination_pct", "n_outcome",
                   "n_proxy_prompts", "theta_star"});
      break;
    case ExperimentKind::gp:
      keys.insert({"theta_star", "contamination_pct", "n_trajectories", "m_target", "m_source", "resolution"});
      break;
    case ExperimentKind::smoking:
      keys.insert({"smoking_csv", "proxy_mode", "mcmc_samples"});
      break;
    case ExperimentKind::toy_verify:
      break;
  }
  return keys;
}

std::uint64_t as_unsigned(const json& v, const std::string& key) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ValidationError("'" + key + "' must be a nonnegative integer");
  }
  return v.get<std::uint64_t>();
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw ValidationError("'" + key + "' must be a number");
  return v.get<double>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
  std::vector<double> out;
  if (v.is_array()) {
    if (v.empty()) throw ValidationError("'" + key + "' must not be an empty list");
    for (const auto& item : v) out.push_back(as_number(item, key));
  } else {
    out.push_back(as_number(v, key));
  }
  return out;
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw ValidationError("'" + key + "' must be a string");
  return v.get<std::string>();
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n_simulations < 1) throw ValidationError("n_simulations must be at least 1");
  if (grid_resolution < 2) throw ValidationError("grid_resolution must be at least 2");
  if (parallelism < 1) throw ValidationError("parallelism must be at least 1");
  if (refinement_iterations < 0 || refinement_iterations > 10) {
    throw ValidationError("refinement_iterations must lie in [0, 10]");
  }
  auto check_pct = [](const std::vector<double>& values, const char* key) {
    for (double v : values) {
      if (!(v >= 0.0 && v <= 100.0)) throw ValidationError(std::string(key) + " values must lie in [0, 100]");
    }
  };
  check_pct(target_resemblance_pct, "target_resemblance_pct");
  check_pct(contamination_pct, "contamination_pct");
  for (double v : multicollinearity) {
    if (!(v >= 0.0)) throw ValidationError("multicollinearity must be nonnegative");
  }
  if (experiment == ExperimentKind::linear && theta_values().size() != 1) {
    throw ValidationError("theta_star takes a single value for the linear experiment");
  }
  if (experiment == ExperimentKind::smoking) {
    if (smoking_csv.empty()) throw ValidationError("smoking experiment needs 'smoking_csv'");
    if (mcmc_samples < 1000) throw ValidationError("mcmc_samples must be at least 1000");
    if (proxy_modes.empty()) throw ValidationError("proxy_mode must not be empty");
  }
}

std::vector<double> ExperimentConfig::theta_values() const {
  if (!theta_star.empty()) return theta_star;
  return {experiment == ExperimentKind::gp ? 1.0 : -1.0};
}

ExperimentConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  if (!doc.contains("experiment")) throw ValidationError("config: 'experiment' is required");

  ExperimentConfig c;
  c.source_text = text;
  c.experiment = kind_from_string(as_string(doc["experiment"], "experiment"));
  const auto allowed = keys_for(c.experiment);
  for (const auto& [key, value] : doc.items()) {
    if (!allowed.count(key)) {
      throw ValidationError("config: unknown key '" + key + "' for experiment " + to_string(c.experiment));
    }
  }
  auto get = [&](const char* key, auto apply) {
    if (doc.contains(key)) apply(doc[key], std::string(key));
  };
  get("n_simulations", [&](const json& v, const std::string& k) { c.n_simulations = as_unsigned(v, k); });
  get("master_seed", [&](const json& v, const std::string& k) { c.master_seed = as_unsigned(v, k); });
  get("grid_resolution", [&](const json& v, const std::string& k) { c.grid_resolution = as_unsigned(v, k); });
  get("output_dir", [&](const json& v, const std::string& k) { c.output_dir = as_string(v, k); });
  get("parallelism", [&](const json& v, const std::string& k) { c.parallelism = as_unsigned(v, k); });
  get("refinement_iterations",
      [&](const json& v, const std::string& k) { c.refinement_iterations = static_cast<int>(as_unsigned(v, k)); });
  get("multicollinearity", [&](const json& v, const std::string& k) { c.multicollinearity = as_number_list(v, k); });
  get("target_resemblance_pct",
      [&](const json& v, const std::string& k) { c.target_resemblance_pct = as_number_list(v, k); });
  get("contamination_pct", [&](const json& v, const std::string& k) { c.contamination_pct = as_number_list(v, k); });
  get("n_outcome", [&](const json& v, const std::string& k) { c.n_outcome = as_unsigned(v, k); });
  get("n_proxy_prompts", [&](const json& v, const std::string& k) { c.n_proxy_prompts = as_unsigned(v, k); });
  get("theta_star", [&](const json& v, const std::string& k) { c.theta_star = as_number_list(v, k); });
  get("n_trajectories", [&](const json& v, const std::string& k) { c.n_trajectories = as_unsigned(v, k); });
  get("m_target", [&](const json& v, const std::string& k) { c.m_target = as_unsigned(v, k); });
  get("m_source", [&](const json& v, const std::string& k) { c.m_source = as_unsigned(v, k); });
  get("resolution", [&](const json& v, const std::string& k) { c.resolution = as_unsigned(v, k); });
  get("smoking_csv", [&](const json& v, const std::string& k) { c.smoking_csv = as_string(v, k); });
  get("mcmc_samples", [&](const json& v, const std::string& k) { c.mcmc_samples = as_unsigned(v, k); });
  get("proxy_mode", [&](const json& v, const std::string& k) {
    c.proxy_modes.clear();
    if (v.is_array()) {
      for (const auto& item : v) c.proxy_modes.push_back(proxy_mode_from_string(as_string(item, k)));
    } else {
      c.proxy_modes.push_back(proxy_mode_from_string(as_string(v, k)));
    }
  });
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  auto config = parse_config(text.str());
  // Relative CSV paths resolve against the config's directory.
  if (!config.smoking_csv.empty() && std::filesystem::path(config.smoking_csv).is_relative() &&
      !std::filesystem::exists(config.smoking_csv)) {
    const auto beside = path.parent_path() / config.smoking_csv;
    if (std::filesystem::exists(beside)) config.smoking_csv = beside.string();
  }
  return config;
}

}  // namespace prompt::harness
