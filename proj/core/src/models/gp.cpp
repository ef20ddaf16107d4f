#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"
#include "prompt/model.hpp"

namespace prompt {
namespace gp {

std::vector<double> kernel_matrix(std::span<const double> x, double theta, double psi) {
  if (!(theta > 0.0) || !(psi > 0.0)) throw SupportError("gp: lengthscales must be positive");
  const std::size_t m = x.size();
  std::vector<double> k(m * m);
  const double a = 1.0 / (2.0 * theta * theta);
  const double b = 1.0 / (2.0 * psi * psi);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = r; c < m; ++c) {
      const double d2 = (x[r] - x[c]) * (x[r] - x[c]);
      const double v = 0.5 * (std::exp(-a * d2) + std::exp(-b * d2));
      k[r * m + c] = v;
      k[c * m + r] = v;
    }
  }
  return k;
}

Factor factorize(std::span<const double> x, double theta, double psi) {
  const std::size_t m = x.size();
  const auto k = kernel_matrix(x, theta, psi);
  using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const Matrix> base(k.data(), m, m);
  for (double jitter = kJitterStart; jitter <= kJitterMax * 1.0000001; jitter *= kJitterGrowth) {
    Matrix kj = base;
    kj.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(kj);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    const auto diag = lower.diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) continue;
    Factor f;
    f.dim = m;
    f.jitter = jitter;
    f.log_det = 2.0 * diag.array().log().sum();
    f.lower.assign(lower.data(), lower.data() + m * m);
    return f;
  }
  throw NumericalError("gp: Cholesky failed at jitter " + std::to_string(kJitterMax) +
                       " (theta=" + std::to_string(theta) + ", psi=" + std::to_string(psi) + ")");
}

double Factor::quadratic_form(std::span<const double> y) const {
  if (y.size() != dim) throw ValidationError("gp: trajectory length differs from the grid");
  // Forward substitution L v = y; the quadratic form is |v|^2.
  double total = 0.0;
  std::vector<double> v(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    double s = y[r];
    const double* row = lower.data() + r * dim;
    for (std::size_t c = 0; c < r; ++c) s -= row[c] * v[c];
    v[r] = s / row[r];
    total += v[r] * v[r];
  }
  return total;
}

double Factor::log_peak() const {
  return -static_cast<double>(dim) * kLogSqrt2Pi - 0.5 * log_det;
}

double Factor::log_density(std::span<const double> y) const {
  return log_peak() - 0.5 * quadratic_form(y);
}

}  // namespace gp

ModelSpec gp_model(std::vector<double> x_grid) {
  if (x_grid.size() < 2) throw ValidationError("gp: the covariate grid needs at least 2 points");
  for (std::size_t k = 1; k < x_grid.size(); ++k) {
    if (!(x_grid[k] > x_grid[k - 1])) throw ValidationError("gp: the covariate grid must be strictly increasing");
  }
  ModelSpec m;
  m.name = "gp";
  m.covariate_dim = 0;
  m.theta_support = Box::cube(1, 0.05, 12.0);
  m.psi_support = Box::cube(1, 0.05, 12.0);

  m.log_likelihood = [x_grid](const Observation& obs, const SharedParam& theta, const TaskParam& psi) {
    return gp::factorize(x_grid, theta[0], psi[0]).log_density(obs.outcome);
  };
  m.log_likelihood_batch = [x_grid](const SourceData& data, const SharedParam& theta,
                                    const TaskParam& psi, std::span<double> out) {
    const auto f = gp::factorize(x_grid, theta[0], psi[0]);
    for (std::size_t i = 0; i < data.size(); ++i) out[i] = f.log_density(data[i].outcome);
  };
  m.simulate = [x_grid](const std::vector<double>& covariates, std::optional<int>,
                        const SharedParam& theta, const TaskParam& psi, Rng& rng) {
    const auto f = gp::factorize(x_grid, theta[0], psi[0]);
    const std::size_t n = x_grid.size();
    std::vector<double> z(n);
    for (double& v : z) v = rng.normal();
    std::vector<double> y(n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c <= r; ++c) y[r] += f.lower[r * n + c] * z[c];
    }
    return Observation{covariates, std::move(y), std::nullopt};
  };
  m.log_mode_density = [x_grid](const SharedParam& theta, const TaskParam& psi) {
    return gp::factorize(x_grid, theta[0], psi[0]).log_peak();
  };
  return m;
}

}  // namespace prompt
