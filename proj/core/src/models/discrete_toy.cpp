#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/model.hpp"

namespace prompt {
namespace {

std::size_t as_index(double v, std::size_t count, const char* what) {
  const double r = std::round(v);
  if (r != v || r < 0 || r >= static_cast<double>(count)) {
    throw SupportError(std::string("discrete toy: ") + what + " index out of range");
  }
  return static_cast<std::size_t>(r);
}

}  // namespace

ModelSpec discrete_toy_model(std::size_t outcome_count, std::size_t theta_count,
                             std::size_t psi_count, ProbabilityTensor table) {
  if (outcome_count == 0 || theta_count == 0 || psi_count == 0) {
    throw ValidationError("discrete toy: all dimensions must be positive");
  }
  if (table.size() != theta_count) throw ValidationError("discrete toy: table has the wrong theta extent");
  for (const auto& plane : table) {
    if (plane.size() != psi_count) throw ValidationError("discrete toy: table has the wrong psi extent");
    for (const auto& row : plane) {
      if (row.size() != outcome_count) throw ValidationError("discrete toy: row has the wrong outcome count");
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0) || p > 1.0) throw ValidationError("discrete toy: probabilities must lie in [0, 1]");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) throw ValidationError("discrete toy: row does not sum to 1");
    }
  }

  // Log table flattened as [theta][psi][y].
  std::vector<double> log_table;
  log_table.reserve(theta_count * psi_count * outcome_count);
  for (const auto& plane : table) {
    for (const auto& row : plane) {
      for (double p : row) log_table.push_back(p > 0.0 ? std::log(p) : kNegInf);
    }
  }

  ModelSpec m;
  m.name = "discrete-toy";
  m.covariate_dim = 0;
  m.theta_support = Box{{Interval{0.0, static_cast<double>(theta_count - 1)}}};
  m.psi_support = Box{{Interval{0.0, static_cast<double>(psi_count - 1)}}};

  m.log_likelihood = [=](const Observation& obs, const SharedParam& theta, const TaskParam& psi) {
    const std::size_t t = as_index(theta[0], theta_count, "theta");
    const std::size_t p = as_index(psi[0], psi_count, "psi");
    const std::size_t y = as_index(obs.value(), outcome_count, "outcome");
    return log_table[(t * psi_count + p) * outcome_count + y];
  };
  m.simulate = [=](const std::vector<double>& covariates, std::optional<int>,
                   const SharedParam& theta, const TaskParam& psi, Rng& rng) {
    const auto& row = table[as_index(theta[0], theta_count, "theta")][as_index(psi[0], psi_count, "psi")];
    const double u = rng.uniform();
    double acc = 0.0;
    std::size_t y = 0;
    // Fall through to the last positive cell so rounding never picks a zero row entry.
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] > 0.0) last_positive = k;
    }
    y = last_positive;
    for (std::size_t k = 0; k < row.size(); ++k) {
      acc += row[k];
      if (u < acc && row[k] > 0.0) {
        y = k;
        break;
      }
    }
    return Observation{covariates, {static_cast<double>(y)}, std::nullopt};
  };
  // Probabilities are already bounded by 1.
  m.log_mode_density = [](const SharedParam&, const TaskParam&) { return 0.0; };
  m.outcome_space = [outcome_count](const Observation&) {
    std::vector<std::vector<double>> space;
    for (std::size_t y = 0; y < outcome_count; ++y) space.push_back({static_cast<double>(y)});
    return space;
  };
  return m;
}

}  // namespace prompt
