#include <cmath>

#include "prompt/math.hpp"
#include "prompt/synthetic.hpp"

namespace prompt {
namespace {

std::vector<double> dirichlet_ones(std::size_t k, Rng& rng) {
  std::vector<double> v(k);
  double total = 0.0;
  for (double& x : v) {
    x = rng.gamma(1.0, 1.0);
    total += x;
  }
  for (double& x : v) x /= total;
  return v;
}

std::size_t between(std::size_t lo, std::size_t hi, Rng& rng) { return lo + rng.below(hi - lo + 1); }

}  // namespace

DataWeights ToyInstance::weights() const {
  return [table = weight_table](const SourceData& d, std::size_t psi_index) {
    std::vector<double> w(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      w[i] = table[psi_index][i][static_cast<std::size_t>(d[i].value())];
    }
    return w;
  };
}

WeightsProvider ToyInstance::weights_provider() const {
  return [w = weights(), np = grid.psi_count()](const SourceData& d, const LogLikelihoodTable&,
                                                const ProxyObservation&) {
    std::vector<RelevanceWeights> out(np);
    for (std::size_t p = 0; p < np; ++p) out[p] = RelevanceWeights{p, w(d, p), 0};
    return out;
  };
}

ProxyModel ToyInstance::proxy_model() const {
  ProxyModel pm;
  pm.log_likelihood = [table = proxy_table](std::span<const double> z, const TaskParam& psi) {
    const double p = table[static_cast<std::size_t>(psi[0])][static_cast<std::size_t>(z[0])];
    return p > 0.0 ? std::log(p) : kNegInf;
  };
  pm.simulate = [table = proxy_table](const TaskParam& psi, Rng& rng) {
    const double p1 = table[static_cast<std::size_t>(psi[0])][1];
    return std::vector<double>{rng.uniform() < p1 ? 1.0 : 0.0};
  };
  pm.payload_space = {{0.0}, {1.0}};
  return pm;
}

ToyInstance random_toy_instance(std::uint64_t seed, const ToyLimits& limits) {
  Rng rng(seed, 0);
  const std::size_t nt = between(limits.min_theta, limits.max_theta, rng);
  const std::size_t np = between(1, limits.max_psi, rng);
  const std::size_t ny = between(2, limits.max_outcomes, rng);
  const std::size_t n = between(1, limits.max_n, rng);

  ProbabilityTensor table(nt, std::vector<std::vector<double>>(np));
  for (auto& plane : table) {
    for (auto& row : plane) {
      row = dirichlet_ones(ny, rng);
      // Re-normalize exactly so the model's row check passes.
      double total = 0.0;
      for (double p : row) total += p;
      row.back() = 1.0 - (total - row.back());
    }
  }
  std::vector<SharedParam> thetas;
  std::vector<TaskParam> psis;
  for (std::size_t t = 0; t < nt; ++t) thetas.emplace_back(std::vector<double>{static_cast<double>(t)});
  for (std::size_t p = 0; p < np; ++p) psis.emplace_back(std::vector<double>{static_cast<double>(p)});
  ParameterGrid grid(thetas, normalized(dirichlet_ones(nt, rng)), psis, normalized(dirichlet_ones(np, rng)));

  TrueProcess truth{thetas[rng.below(nt)], {}, psis[rng.below(np)]};
  for (std::size_t i = 0; i < n; ++i) truth.psi_star.push_back(psis[rng.below(np)]);

  std::vector<std::vector<std::vector<double>>> weights(np, std::vector<std::vector<double>>(n, std::vector<double>(ny)));
  for (auto& per_psi : weights) {
    for (auto& per_obs : per_psi) {
      for (double& w : per_obs) w = rng.uniform();
    }
  }

  std::vector<std::vector<double>> proxy(np);
  for (auto& row : proxy) {
    const double p1 = rng.uniform();
    row = {1.0 - p1, p1};
  }

  auto model = discrete_toy_model(ny, nt, np, table);
  return ToyInstance{std::move(table),
                     std::move(model),
                     std::move(grid),
                     normalized(dirichlet_ones(np, rng)),
                     std::move(truth),
                     Design(n, Observation{{}, {0.0}, std::nullopt}),
                     std::move(weights),
                     std::move(proxy)};
}

}  // namespace prompt
