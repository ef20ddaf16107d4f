#pragma once

#include "prompt/diagnostics.hpp"

namespace prompt {

void check_truth(const ModelSpec& model, const TrueProcess& truth, const Design& design);

// Visits datasets with their log probability under the true process;
// `include_impossible` also visits zero-probability outcomes (log prob -inf).
void for_each_dataset(const ModelSpec& model, const Design& design, const TrueProcess& truth,
                      bool include_impossible, const std::function<void(const SourceData&, double)>& visit);

// Nearest theta node; throws SupportError outside the node range.
std::size_t snap_theta(const ParameterGrid& grid, const SharedParam& theta, double& distance);

// Mean and standard error of Monte Carlo draws.
Estimate summarize(const std::vector<double>& values);

}  // namespace prompt
