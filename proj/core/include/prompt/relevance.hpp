#pragma once

#include <span>
#include <string>
#include <vector>

#include "prompt/inference.hpp"
#include "prompt/model.hpp"
#include "prompt/types.hpp"

namespace prompt {

// Weights R_i(psi_target) for one candidate target task parameter.
struct RelevanceWeights {
  std::size_t psi_node_index = 0;
  std::vector<double> weights;
  std::size_t clipped = 0;  // entries that exceeded 1 before clipping
};

enum class RelevanceKind { prior_expected, sigmoid_ratio, constant_one };
enum class Normalizer { mode_density, none };

struct RelevanceConfig {
  RelevanceKind kind = RelevanceKind::prior_expected;
  int refinement_iterations = 3;
  Normalizer normalizer = Normalizer::mode_density;

  void validate() const;
};

std::string to_string(RelevanceKind kind);
RelevanceKind relevance_kind_from_string(const std::string& name);

// w_i = sum_theta belief(theta) p(d_i | theta, psi_i = psi_target) / mode
// density, clipped at 1.
RelevanceWeights prior_expected_relevance(const ModelSpec& model, const SourceData& data,
                                          const ParameterGrid& grid, std::span<const double> theta_belief,
                                          std::size_t psi_index, Normalizer normalizer = Normalizer::mode_density);
RelevanceWeights prior_expected_relevance(const LogLikelihoodTable& table, std::span<const double> theta_belief,
                                          std::size_t psi_index, Normalizer normalizer = Normalizer::mode_density);

// w_i = sigmoid(n p(d_i | 0, psi) / p(d | 0, psi)) with the shared parameter
// fixed at zero.
RelevanceWeights sigmoid_ratio_relevance(const ModelSpec& model, const SourceData& data,
                                         const TaskParam& psi_target, std::size_t psi_index = 0);

RelevanceWeights constant_relevance(std::size_t n, std::size_t psi_index, double value = 1.0);

struct RefinedRelevance {
  std::vector<RelevanceWeights> weights_per_psi;
  std::vector<double> theta_belief;
  // Belief used at each evaluation, starting with the prior.
  std::vector<std::vector<double>> belief_history;
  std::vector<std::string> warnings;
};

// Alternates relevance evaluation and r-weighted posterior computation
// `refinement_iterations` times, then evaluates relevance once more under the
// final belief. Kinds other than prior-expected skip the loop.
RefinedRelevance refine_relevance(const ModelSpec& model, const SourceData& data, const ParameterGrid& grid,
                                  const LogLikelihoodTable& table, const ProxyObservation& proxy,
                                  const RelevanceConfig& config);
RefinedRelevance refine_relevance(const ModelSpec& model, const SourceData& data, const ParameterGrid& grid,
                                  const ProxyObservation& proxy, const RelevanceConfig& config);

}  // namespace prompt
