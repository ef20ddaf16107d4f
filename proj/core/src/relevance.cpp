#include "prompt/relevance.hpp"

#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"

namespace prompt {

void RelevanceConfig::validate() const {
  if (refinement_iterations < 0 || refinement_iterations > 10) {
    throw ValidationError("refinement iterations must lie in [0, 10]");
  }
}

std::string to_string(RelevanceKind kind) {
  switch (kind) {
    case RelevanceKind::prior_expected: return "prior-expected";
    case RelevanceKind::sigmoid_ratio: return "sigmoid-ratio";
    case RelevanceKind::constant_one: return "constant-one";
  }
  return "?";
}

RelevanceKind relevance_kind_from_string(const std::string& name) {
  if (name == "prior-expected") return RelevanceKind::prior_expected;
  if (name == "sigmoid-ratio") return RelevanceKind::sigmoid_ratio;
  if (name == "constant-one") return RelevanceKind::constant_one;
  throw ValidationError("unknown relevance kind '" + name + "'");
}

namespace {

// Shared by the model and table variants: row(t) gives log p(d_. | theta_t,
// psi) and log_mode(t) the normalizer for that node.
template <class Row, class Mode>
RelevanceWeights expected_weights(std::size_t n, std::span<const double> belief, std::size_t psi_index,
                                  Row row, Mode log_mode) {
  double total = 0.0;
  for (double b : belief) {
    if (!(b >= 0.0)) throw ValidationError("theta belief has a negative entry");
    total += b;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("theta belief is not normalized");

  std::vector<std::size_t> support;
  std::vector<double> log_b;
  for (std::size_t t = 0; t < belief.size(); ++t) {
    if (belief[t] > 0.0) {
      support.push_back(t);
      log_b.push_back(std::log(belief[t]));
    }
  }
  std::vector<std::vector<double>> terms(n, std::vector<double>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    const auto ll = row(support[k]);
    const double shift = log_b[k] - log_mode(support[k]);
    for (std::size_t i = 0; i < n; ++i) terms[i][k] = ll[i] + shift;
  }
  RelevanceWeights out{psi_index, std::vector<double>(n), 0};
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(log_sum_exp(terms[i]));
    if (std::isnan(w)) throw NumericalError("relevance weight is NaN for observation " + std::to_string(i));
    if (w > 1.0) {
      ++out.clipped;
      out.weights[i] = 1.0;
    } else {
      out.weights[i] = w;
    }
  }
  return out;
}

}  // namespace

RelevanceWeights prior_expected_relevance(const ModelSpec& model, const SourceData& data,
                                          const ParameterGrid& grid, std::span<const double> theta_belief,
                                          std::size_t psi_index, Normalizer normalizer) {
  if (theta_belief.size() != grid.theta_count()) throw ValidationError("belief length differs from theta grid");
  if (normalizer == Normalizer::mode_density && !model.log_mode_density) {
    throw ConfigurationError(model.name + ": mode density is undefined; use sigmoid-ratio relevance");
  }
  const auto& psi = grid.psi_nodes().at(psi_index);
  std::vector<double> ll(data.size());
  return expected_weights(
      data.size(), theta_belief, psi_index,
      [&](std::size_t t) {
        model.batch(data, grid.theta_nodes()[t], psi, ll);
        return std::span<const double>(ll);
      },
      [&](std::size_t t) {
        return normalizer == Normalizer::mode_density ? model.log_mode_density(grid.theta_nodes()[t], psi) : 0.0;
      });
}

RelevanceWeights prior_expected_relevance(const LogLikelihoodTable& table, std::span<const double> theta_belief,
                                          std::size_t psi_index, Normalizer normalizer) {
  if (theta_belief.size() != table.theta_count()) throw ValidationError("belief length differs from theta grid");
  if (psi_index >= table.psi_count()) throw ValidationError("psi index out of range");
  if (normalizer == Normalizer::mode_density && !table.has_log_mode()) {
    throw ConfigurationError("mode density is undefined for this model; use sigmoid-ratio relevance");
  }
  return expected_weights(
      table.size(), theta_belief, psi_index, [&](std::size_t t) { return table.row(psi_index, t); },
      [&](std::size_t t) { return normalizer == Normalizer::mode_density ? table.log_mode(psi_index, t) : 0.0; });
}

RelevanceWeights sigmoid_ratio_relevance(const ModelSpec& model, const SourceData& data,
                                         const TaskParam& psi_target, std::size_t psi_index) {
  const SharedParam zero(std::vector<double>(model.theta_dim, 0.0));
  if (!model.theta_support.contains(zero.span())) {
    throw ConfigurationError(model.name + ": sigmoid-ratio relevance needs theta = 0 in the support");
  }
  std::vector<double> ll(data.size());
  model.batch(data, zero, psi_target, ll);
  double total = 0.0;
  for (double v : ll) total += v;
  if (total == kNegInf) throw DegenerateError("sigmoid-ratio relevance: the data are impossible at theta = 0");
  const double log_n = std::log(static_cast<double>(data.size()));
  RelevanceWeights out{psi_index, std::vector<double>(data.size()), 0};
  for (std::size_t i = 0; i < ll.size(); ++i) {
    // exp overflows to +inf, which sigmoid maps to exactly 1.
    out.weights[i] = sigmoid(std::exp(log_n + ll[i] - total));
  }
  return out;
}

RelevanceWeights constant_relevance(std::size_t n, std::size_t psi_index, double value) {
  if (!(value >= 0.0 && value <= 1.0)) throw ValidationError("constant relevance must lie in [0, 1]");
  return {psi_index, std::vector<double>(n, value), 0};
}

RefinedRelevance refine_relevance(const ModelSpec& model, const SourceData& data, const ParameterGrid& grid,
                                  const ProxyObservation& proxy, const RelevanceConfig& config) {
  return refine_relevance(model, data, grid, LogLikelihoodTable(model, data, grid), proxy, config);
}

RefinedRelevance refine_relevance(const ModelSpec& model, const SourceData& data, const ParameterGrid& grid,
                                  const LogLikelihoodTable& table, const ProxyObservation& proxy,
                                  const RelevanceConfig& config) {
  config.validate();
  RefinedRelevance out;
  out.theta_belief = grid.theta_prior_mass();
  const std::size_t np = grid.psi_count();

  auto evaluate = [&]() {
    out.belief_history.push_back(out.theta_belief);
    std::vector<RelevanceWeights> weights(np);
    std::size_t clipped = 0;
    for (std::size_t p = 0; p < np; ++p) {
      switch (config.kind) {
        case RelevanceKind::prior_expected:
          weights[p] = prior_expected_relevance(table, out.theta_belief, p, config.normalizer);
          break;
        case RelevanceKind::sigmoid_ratio:
          weights[p] = sigmoid_ratio_relevance(model, data, grid.psi_nodes()[p], p);
          break;
        case RelevanceKind::constant_one:
          weights[p] = constant_relevance(data.size(), p);
          break;
      }
      clipped += weights[p].clipped;
    }
    if (clipped > 0) {
      out.warnings.push_back(std::to_string(clipped) + " relevance weights clipped at 1");
    }
    return weights;
  };

  const int iterations = config.kind == RelevanceKind::prior_expected ? config.refinement_iterations : 0;
  for (int it = 0; it < iterations; ++it) {
    try {
      const auto weights = evaluate();
      out.theta_belief = r_weighted_posterior(table, grid, weights, proxy).theta_marginal();
    } catch (const Error& e) {
      throw NumericalError("relevance refinement iteration " + std::to_string(it + 1) + ": " + e.what());
    }
  }
  out.weights_per_psi = evaluate();
  return out;
}

}  // namespace prompt
