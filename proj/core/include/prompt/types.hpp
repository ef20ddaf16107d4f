#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace prompt {

// One observation d_i. Scalar outcomes (Gaussian value, binomial count,
// categorical index) live in outcome[0]; a GP observation is a whole
// trajectory stored in `outcome`.
struct Observation {
  std::vector<double> covariates;
  std::vector<double> outcome;
  std::optional<int> trial_count;

  double value() const { return outcome.at(0); }
};

// Ordered source data d_(1:n), n >= 1 with a homogeneous covariate layout.
class SourceData {
 public:
  explicit SourceData(std::vector<Observation> observations);

  std::size_t size() const { return observations_.size(); }
  std::size_t covariate_dim() const { return observations_.front().covariates.size(); }
  const Observation& operator[](std::size_t i) const { return observations_[i]; }
  auto begin() const { return observations_.begin(); }
  auto end() const { return observations_.end(); }
  const std::vector<Observation>& observations() const { return observations_; }

  // Subset by index, preserving order.
  SourceData select(std::span<const std::size_t> indices) const;

 private:
  std::vector<Observation> observations_;
};

// Finite real vector tagged by role so shared and task parameters cannot be
// swapped silently.
template <class Tag>
class ParamVector {
 public:
  ParamVector() = default;
  ParamVector(std::vector<double> value);  // NOLINT(implicit)
  ParamVector(std::initializer_list<double> value) : ParamVector(std::vector<double>(value)) {}

  std::size_t size() const { return value_.size(); }
  double operator[](std::size_t i) const { return value_[i]; }
  const std::vector<double>& value() const { return value_; }
  std::span<const double> span() const { return value_; }

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> value_;
};

struct SharedTag {};
struct TaskTag {};
using SharedParam = ParamVector<SharedTag>;
using TaskParam = ParamVector<TaskTag>;

extern template class ParamVector<SharedTag>;
extern template class ParamVector<TaskTag>;

struct Interval {
  double lo;
  double hi;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

// Axis-aligned support box.
struct Box {
  std::vector<Interval> sides;

  static Box cube(std::size_t dim, double lo, double hi);
  std::size_t dim() const { return sides.size(); }
  bool contains(std::span<const double> x) const;
};

// Discretized joint prior over (theta, psi): arbitrary node lists with one
// probability mass per node. Masses are normalized to sum to 1.
class ParameterGrid {
 public:
  ParameterGrid(std::vector<SharedParam> theta_nodes, std::vector<double> theta_mass,
                std::vector<TaskParam> psi_nodes, std::vector<double> psi_mass);

  // Scalar grid: `count` evenly spaced nodes on [lo, hi] (both ends included),
  // mass proportional to the prior density at each node (midpoint rule with the
  // node at the cell centre).
  static ParameterGrid uniform(Interval theta_box, std::size_t theta_count,
                               const std::function<double(double)>& theta_log_pdf,
                               Interval psi_box, std::size_t psi_count,
                               const std::function<double(double)>& psi_log_pdf);

  std::size_t theta_count() const { return theta_nodes_.size(); }
  std::size_t psi_count() const { return psi_nodes_.size(); }
  const std::vector<SharedParam>& theta_nodes() const { return theta_nodes_; }
  const std::vector<TaskParam>& psi_nodes() const { return psi_nodes_; }
  const std::vector<double>& theta_prior_mass() const { return theta_mass_; }
  const std::vector<double>& psi_prior_mass() const { return psi_mass_; }

  // Same nodes with a different psi prior (renormalized).
  ParameterGrid with_psi_prior(std::vector<double> psi_mass) const;
  ParameterGrid with_theta_prior(std::vector<double> theta_mass) const;

  // Index of the node closest (Euclidean) to `value`.
  std::size_t nearest_theta(const SharedParam& value) const;
  std::size_t nearest_psi(const TaskParam& value) const;

 private:
  std::vector<SharedParam> theta_nodes_;
  std::vector<double> theta_mass_;
  std::vector<TaskParam> psi_nodes_;
  std::vector<double> psi_mass_;
};

// Evenly spaced points on [lo, hi], both ends included.
std::vector<double> linspace(double lo, double hi, std::size_t count);

// Normalize a nonnegative mass vector; throws ValidationError if it has a
// negative or non-finite entry and DegenerateError if it sums to 0.
std::vector<double> normalized(std::vector<double> mass);

}  // namespace prompt
