#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/model.hpp"

namespace prompt {

ModelSpec linear_model() {
  ModelSpec m;
  m.name = "linear";
  m.covariate_dim = 2;
  m.theta_support = Box::cube(1, -10.0, 10.0);
  m.psi_support = Box::cube(1, -10.0, 10.0);

  m.log_likelihood = [](const Observation& obs, const SharedParam& theta, const TaskParam& psi) {
    if (obs.covariates.size() != 2) throw ValidationError("linear: expected 2 covariates");
    const double mean = theta[0] * obs.covariates[0] + psi[0] * obs.covariates[1];
    return normal_log_pdf(obs.value(), mean, 1.0);
  };
  m.log_likelihood_batch = [](const SourceData& data, const SharedParam& theta,
                              const TaskParam& psi, std::span<double> out) {
    const double t = theta[0];
    const double p = psi[0];
    for (std::size_t i = 0; i < data.size(); ++i) {
      const auto& x = data[i].covariates;
      const double r = data[i].value() - (t * x[0] + p * x[1]);
      out[i] = -0.5 * r * r - kLogSqrt2Pi;
    }
  };
  m.simulate = [](const std::vector<double>& x, std::optional<int>, const SharedParam& theta,
                  const TaskParam& psi, Rng& rng) {
    if (x.size() != 2) throw ValidationError("linear: expected 2 covariates");
    return Observation{x, {rng.normal(theta[0] * x[0] + psi[0] * x[1], 1.0)}, std::nullopt};
  };
  m.log_mode_density = [](const SharedParam&, const TaskParam&) { return -kLogSqrt2Pi; };
  return m;
}

}  // namespace prompt
