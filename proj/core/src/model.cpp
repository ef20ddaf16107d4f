#include "prompt/model.hpp"

#include <cmath>

#include "prompt/errors.hpp"

namespace prompt {

void ModelSpec::check(const Observation& obs) const {
  if (obs.covariates.size() != covariate_dim) {
    throw ValidationError(name + ": expected " + std::to_string(covariate_dim) +
                          " covariates, got " + std::to_string(obs.covariates.size()));
  }
  if (binomial != obs.trial_count.has_value()) {
    throw ValidationError(name + (binomial ? ": trial count is required"
                                           : ": trial count is only valid for binomial models"));
  }
  if (binomial) {
    const double k = obs.value();
    if (*obs.trial_count < 1) throw ValidationError(name + ": trial count must be positive");
    if (k < 0 || k != std::floor(k)) throw ValidationError(name + ": outcome must be a nonnegative count");
    if (k > *obs.trial_count) throw ValidationError(name + ": outcome exceeds trial count");
  }
}

void ModelSpec::check(const SourceData& data) const {
  for (std::size_t i = 0; i < data.size(); ++i) {
    try {
      check(data[i]);
    } catch (const ValidationError& e) {
      throw ValidationError("observation " + std::to_string(i) + ": " + e.what());
    }
  }
}

void ModelSpec::check_theta(const SharedParam& theta) const {
  if (theta.size() != theta_dim) throw ValidationError(name + ": wrong shared parameter dimension");
  if (!theta_support.contains(theta.span())) throw SupportError(name + ": shared parameter outside support");
}

void ModelSpec::check_psi(const TaskParam& psi) const {
  if (psi.size() != psi_dim) throw ValidationError(name + ": wrong task parameter dimension");
  if (!psi_support.contains(psi.span())) throw SupportError(name + ": task parameter outside support");
}

void ModelSpec::batch(const SourceData& data, const SharedParam& theta, const TaskParam& psi,
                      std::span<double> out) const {
  if (out.size() != data.size()) throw ValidationError("batch output has the wrong length");
  if (log_likelihood_batch) {
    log_likelihood_batch(data, theta, psi, out);
  } else {
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = log_likelihood(data[i], theta, psi);
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::isnan(out[i])) {
      throw NumericalError(name + ": NaN log-likelihood for observation " + std::to_string(i));
    }
  }
}

}  // namespace prompt
