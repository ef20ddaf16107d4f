#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/model.hpp"

namespace prompt {
namespace {

double linear_predictor(const std::vector<double>& x, const SharedParam& theta, const TaskParam& psi) {
  double eta = psi[0];
  for (std::size_t j = 0; j < 4; ++j) eta += theta[j] * x[j];
  return eta;
}

}  // namespace

ModelSpec binomial_logit_model() {
  ModelSpec m;
  m.name = "binomial-logit";
  m.covariate_dim = 4;
  m.theta_dim = 4;
  m.binomial = true;
  m.theta_support = Box::cube(4, -10.0, 10.0);
  m.psi_support = Box::cube(1, -10.0, 10.0);

  m.log_likelihood = [spec_check = m](const Observation& obs, const SharedParam& theta,
                                      const TaskParam& psi) {
    spec_check.check(obs);
    const double eta = linear_predictor(obs.covariates, theta, psi);
    return binomial_log_pmf(static_cast<int>(obs.value()), *obs.trial_count, log_sigmoid(eta),
                            log_sigmoid(-eta));
  };
  m.simulate = [](const std::vector<double>& x, std::optional<int> trials, const SharedParam& theta,
                  const TaskParam& psi, Rng& rng) {
    if (x.size() != 4) throw ValidationError("binomial-logit: expected 4 covariates");
    if (!trials || *trials < 1) throw ValidationError("binomial-logit: trial count is required");
    const int k = rng.binomial(*trials, sigmoid(linear_predictor(x, theta, psi)));
    return Observation{x, {static_cast<double>(k)}, trials};
  };
  m.outcome_space = [](const Observation& templ) {
    if (!templ.trial_count) throw ValidationError("binomial-logit: trial count is required");
    std::vector<std::vector<double>> space;
    for (int k = 0; k <= *templ.trial_count; ++k) space.push_back({static_cast<double>(k)});
    return space;
  };
  return m;
}

}  // namespace prompt
