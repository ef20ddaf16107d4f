#include "prompt/types.hpp"

#include <cmath>
#include <limits>

#include "prompt/errors.hpp"
#include "prompt/math.hpp"

namespace prompt {

SourceData::SourceData(std::vector<Observation> observations)
    : observations_(std::move(observations)) {
  if (observations_.empty()) throw ValidationError("source data needs at least one observation");
  const std::size_t dim = observations_.front().covariates.size();
  for (std::size_t i = 0; i < observations_.size(); ++i) {
    if (observations_[i].covariates.size() != dim) {
      throw ValidationError("observation " + std::to_string(i) + " has " +
                            std::to_string(observations_[i].covariates.size()) +
                            " covariates, expected " + std::to_string(dim));
    }
    if (observations_[i].outcome.empty()) {
      throw ValidationError("observation " + std::to_string(i) + " has no outcome");
    }
  }
}

SourceData SourceData::select(std::span<const std::size_t> indices) const {
  std::vector<Observation> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(observations_.at(i));
  return SourceData(std::move(picked));
}

template <class Tag>
ParamVector<Tag>::ParamVector(std::vector<double> value) : value_(std::move(value)) {
  for (double v : value_) {
    if (!std::isfinite(v)) throw ValidationError("parameter entries must be finite");
  }
}

template class ParamVector<SharedTag>;
template class ParamVector<TaskTag>;

Box Box::cube(std::size_t dim, double lo, double hi) {
  return Box{std::vector<Interval>(dim, Interval{lo, hi})};
}

bool Box::contains(std::span<const double> x) const {
  if (x.size() != sides.size()) return false;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!sides[j].contains(x[j])) return false;
  }
  return true;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count == 0) throw ValidationError("linspace needs at least one point");
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t k = 0; k < count; ++k) out[k] = lo + step * static_cast<double>(k);
  out.back() = hi;
  return out;
}

std::vector<double> normalized(std::vector<double> mass) {
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("mass entries must be finite and nonnegative");
    total += m;
  }
  if (total <= 0.0) throw DegenerateError("mass vector sums to zero");
  for (double& m : mass) m /= total;
  return mass;
}

namespace {

void check_mass(const std::vector<double>& mass, std::size_t nodes, const char* what) {
  if (nodes == 0) throw ValidationError(std::string(what) + " node list is empty");
  if (mass.size() != nodes) throw ValidationError(std::string(what) + " mass length differs from node count");
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError(std::string(what) + " mass must be nonnegative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError(std::string(what) + " mass sums to " + std::to_string(total) + ", not 1");
  }
}

template <class P>
std::size_t nearest(const std::vector<P>& nodes, const P& value) {
  std::size_t best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (nodes[k].size() != value.size()) throw ValidationError("parameter dimension mismatch");
    double d = 0.0;
    for (std::size_t j = 0; j < value.size(); ++j) {
      const double diff = nodes[k][j] - value[j];
      d += diff * diff;
    }
    if (d < best_dist) {
      best_dist = d;
      best = k;
    }
  }
  return best;
}

std::vector<double> mass_from_log_pdf(const std::vector<double>& nodes,
                                      const std::function<double(double)>& log_pdf) {
  std::vector<double> log_mass(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) log_mass[k] = log_pdf(nodes[k]);
  normalize_log_weights(log_mass);
  return log_mass;
}

}  // namespace

ParameterGrid::ParameterGrid(std::vector<SharedParam> theta_nodes, std::vector<double> theta_mass,
                             std::vector<TaskParam> psi_nodes, std::vector<double> psi_mass)
    : theta_nodes_(std::move(theta_nodes)),
      theta_mass_(std::move(theta_mass)),
      psi_nodes_(std::move(psi_nodes)),
      psi_mass_(std::move(psi_mass)) {
  check_mass(theta_mass_, theta_nodes_.size(), "theta");
  check_mass(psi_mass_, psi_nodes_.size(), "psi");
}

ParameterGrid ParameterGrid::uniform(Interval theta_box, std::size_t theta_count,
                                     const std::function<double(double)>& theta_log_pdf,
                                     Interval psi_box, std::size_t psi_count,
                                     const std::function<double(double)>& psi_log_pdf) {
  const auto theta_values = linspace(theta_box.lo, theta_box.hi, theta_count);
  const auto psi_values = linspace(psi_box.lo, psi_box.hi, psi_count);
  std::vector<SharedParam> thetas;
  std::vector<TaskParam> psis;
  for (double v : theta_values) thetas.emplace_back(std::vector<double>{v});
  for (double v : psi_values) psis.emplace_back(std::vector<double>{v});
  return ParameterGrid(std::move(thetas), mass_from_log_pdf(theta_values, theta_log_pdf),
                       std::move(psis), mass_from_log_pdf(psi_values, psi_log_pdf));
}

ParameterGrid ParameterGrid::with_psi_prior(std::vector<double> psi_mass) const {
  return ParameterGrid(theta_nodes_, theta_mass_, psi_nodes_, normalized(std::move(psi_mass)));
}

ParameterGrid ParameterGrid::with_theta_prior(std::vector<double> theta_mass) const {
  return ParameterGrid(theta_nodes_, normalized(std::move(theta_mass)), psi_nodes_, psi_mass_);
}

std::size_t ParameterGrid::nearest_theta(const SharedParam& value) const {
  return nearest(theta_nodes_, value);
}

std::size_t ParameterGrid::nearest_psi(const TaskParam& value) const {
  return nearest(psi_nodes_, value);
}

}  // namespace prompt
