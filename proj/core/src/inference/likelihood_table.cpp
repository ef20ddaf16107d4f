#include "prompt/errors.hpp"
#include "prompt/inference.hpp"

namespace prompt {

LogLikelihoodTable::LogLikelihoodTable(const ModelSpec& model, const SourceData& data,
                                       const ParameterGrid& grid)
    : theta_count_(grid.theta_count()), psi_count_(grid.psi_count()), n_(data.size()) {
  model.check(data);
  values_.resize(theta_count_ * psi_count_ * n_);
  for (std::size_t p = 0; p < psi_count_; ++p) {
    const auto& psi = grid.psi_nodes()[p];
    model.check_psi(psi);
    for (std::size_t t = 0; t < theta_count_; ++t) {
      const auto& theta = grid.theta_nodes()[t];
      if (p == 0) model.check_theta(theta);
      model.batch(data, theta, psi, {values_.data() + (p * theta_count_ + t) * n_, n_});
    }
  }
  if (model.log_mode_density) {
    log_mode_.resize(theta_count_ * psi_count_);
    for (std::size_t p = 0; p < psi_count_; ++p) {
      for (std::size_t t = 0; t < theta_count_; ++t) {
        log_mode_[p * theta_count_ + t] = model.log_mode_density(grid.theta_nodes()[t], grid.psi_nodes()[p]);
      }
    }
  }
}

}  // namespace prompt
