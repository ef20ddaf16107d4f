#include <algorithm>
#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/inference.hpp"
#include "prompt/math.hpp"

namespace prompt {

PosteriorPredictive::PosteriorPredictive(ModelSpec model, PosteriorTable table, Observation templ)
    : model_(std::move(model)), table_(std::move(table)), templ_(std::move(templ)) {
  if (table_.joint_mass.size() != table_.grid.theta_count() * table_.grid.psi_count()) {
    throw ValidationError("posterior table does not match its grid");
  }
  cumulative_.resize(table_.joint_mass.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < cumulative_.size(); ++k) {
    acc += table_.joint_mass[k];
    cumulative_[k] = acc;
  }
  if (std::abs(acc - 1.0) > 1e-10) throw ValidationError("posterior table is not normalized");
}

double PosteriorPredictive::log_density(std::span<const double> outcome) const {
  Observation obs = templ_;
  obs.outcome.assign(outcome.begin(), outcome.end());
  return log_density(obs);
}

double PosteriorPredictive::log_density(const Observation& outcome) const {
  const std::size_t np = table_.grid.psi_count();
  std::vector<double> terms;
  terms.reserve(table_.joint_mass.size());
  for (std::size_t t = 0; t < table_.grid.theta_count(); ++t) {
    for (std::size_t p = 0; p < np; ++p) {
      const double m = table_.joint_mass[t * np + p];
      if (m <= 0.0) continue;
      terms.push_back(std::log(m) +
                      model_.log_likelihood(outcome, table_.grid.theta_nodes()[t], table_.grid.psi_nodes()[p]));
    }
  }
  return log_sum_exp(terms);
}

Observation PosteriorPredictive::sample(Rng& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t k = std::min<std::size_t>(it - cumulative_.begin(), cumulative_.size() - 1);
  while (table_.joint_mass[k] <= 0.0 && k > 0) --k;
  const std::size_t np = table_.grid.psi_count();
  return model_.simulate(templ_.covariates, templ_.trial_count, table_.grid.theta_nodes()[k / np],
                         table_.grid.psi_nodes()[k % np], rng);
}

}  // namespace prompt
