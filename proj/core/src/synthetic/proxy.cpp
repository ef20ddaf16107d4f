#include <cmath>
#include <map>
#include <memory>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/synthetic.hpp"

namespace prompt {
namespace {

// log p~ for every prompt at one psi.
std::vector<double> log_fits(const ModelSpec& model, const ParameterGrid& grid, const SourceData& prompts,
                             const TaskParam& psi) {
  if (!model.log_mode_density) {
    throw ConfigurationError(model.name + ": expert proxy needs a mode density normalizer");
  }
  const std::size_t m = prompts.size();
  std::vector<std::vector<double>> terms(m);
  std::vector<double> ll(m);
  for (std::size_t t = 0; t < grid.theta_count(); ++t) {
    const double mass = grid.theta_prior_mass()[t];
    if (mass <= 0.0) continue;
    const auto& theta = grid.theta_nodes()[t];
    model.batch(prompts, theta, psi, ll);
    const double shift = std::log(mass) - model.log_mode_density(theta, psi);
    for (std::size_t j = 0; j < m; ++j) terms[j].push_back(ll[j] + shift);
  }
  std::vector<double> out(m);
  for (std::size_t j = 0; j < m; ++j) out[j] = std::min(0.0, log_sum_exp(terms[j]));
  return out;
}

double rating_log_likelihood(int rating, double log_fit) {
  const double log_1m = log_fit == 0.0 ? kNegInf : std::log1p(-std::exp(log_fit));
  return binomial_log_pmf(rating, kExpertScale, log_fit, log_1m);
}

struct FitCache {
  const ModelSpec model;
  const ParameterGrid grid;
  const SourceData prompts;
  std::map<std::vector<double>, std::vector<double>> by_node;

  std::vector<double> at(const TaskParam& psi) const {
    if (auto it = by_node.find(psi.value()); it != by_node.end()) return it->second;
    return log_fits(model, grid, prompts, psi);
  }
};

}  // namespace

double prompt_fit(const ModelSpec& model, const ParameterGrid& grid, const Observation& prompt,
                  const TaskParam& psi) {
  return std::exp(log_fits(model, grid, SourceData({prompt}), psi)[0]);
}

ExpertProxy gen_expert_proxy(const ModelSpec& model, const ParameterGrid& grid,
                             const std::vector<Observation>& prompts, const TaskParam& psi_target_star,
                             double contamination_pct, std::uint64_t seed) {
  if (prompts.empty()) throw ValidationError("expert proxy needs at least one prompt");
  if (!(contamination_pct >= 0.0 && contamination_pct <= 100.0)) {
    throw ValidationError("contamination must lie in [0, 100]");
  }
  auto cache = std::make_shared<FitCache>(FitCache{model, grid, SourceData(prompts), {}});
  for (const auto& psi : grid.psi_nodes()) cache->by_node.emplace(psi.value(), log_fits(model, grid, cache->prompts, psi));

  ExpertProxy out;
  const auto truth = log_fits(model, grid, cache->prompts, psi_target_star);
  Rng rng(seed, 0);
  // Exactly round(pct * m) prompts, chosen uniformly, are contaminated.
  const std::size_t m = prompts.size();
  std::vector<std::size_t> order(m);
  for (std::size_t j = 0; j < m; ++j) order[j] = j;
  const auto n_flipped = static_cast<std::size_t>(std::llround(contamination_pct / 100.0 * static_cast<double>(m)));
  std::vector<bool> flipped_at(m, false);
  for (std::size_t k = 0; k < n_flipped; ++k) {
    std::swap(order[k], order[k + rng.below(m - k)]);
    flipped_at[order[k]] = true;
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double fit = std::exp(truth[j]);
    const bool flipped = flipped_at[j];
    const int rating = rng.binomial(kExpertScale, flipped ? 1.0 - fit : fit);
    out.fit_at_truth.push_back(fit);
    out.contaminated.push_back(flipped);
    out.ratings.push_back(rating);
    out.per_prompt.push_back(
        {{static_cast<double>(rating)}, [cache, j](std::span<const double> z, const TaskParam& psi) {
           return rating_log_likelihood(static_cast<int>(z[0]), cache->at(psi)[j]);
         }});
  }
  std::vector<double> payload(out.ratings.begin(), out.ratings.end());
  out.combined = {payload, [cache](std::span<const double> z, const TaskParam& psi) {
                    const auto fits = cache->at(psi);
                    double total = 0.0;
                    for (std::size_t j = 0; j < fits.size(); ++j) {
                      total += rating_log_likelihood(static_cast<int>(z[j]), fits[j]);
                    }
                    return total;
                  }};
  return out;
}

ImpreciseProxy gen_imprecise_estimate_proxy(double psi_target_star, double sigma, bool bias_flag,
                                            std::uint64_t seed) {
  if (!(sigma > 0.0)) throw ValidationError("proxy sigma must be positive");
  Rng rng(seed, 0);
  ImpreciseProxy out;
  const double draw = rng.normal(psi_target_star, sigma);
  if (bias_flag) out.bias = rng.normal(0.0, 3.0);
  out.proxy = {{draw + out.bias}, [sigma](std::span<const double> z, const TaskParam& psi) {
                 return normal_log_pdf(z[0], psi[0], sigma);
               }};
  return out;
}

}  // namespace prompt
