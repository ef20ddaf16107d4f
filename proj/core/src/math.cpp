#include "prompt/math.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>

#include "prompt/errors.hpp"

namespace prompt {

double log_sum_exp(std::span<const double> values) {
  double max_value = kNegInf;
  for (double v : values) max_value = std::max(max_value, v);
  if (max_value == kNegInf) return kNegInf;
  if (std::isinf(max_value)) return max_value;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - max_value);
  return max_value + std::log(acc);
}

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double lognormal_log_pdf(double x, double mu, double sigma) {
  if (x <= 0.0) return kNegInf;
  const double lx = std::log(x);
  return normal_log_pdf(lx, mu, sigma) - lx;
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (x <= 0.0) return kNegInf;
  return shape * std::log(rate) - boost::math::lgamma(shape) + (shape - 1.0) * std::log(x) -
         rate * x;
}

double log_binomial_coefficient(int n, int k) {
  if (k < 0 || k > n) return kNegInf;
  return boost::math::lgamma(n + 1.0) - boost::math::lgamma(k + 1.0) -
         boost::math::lgamma(n - k + 1.0);
}

double binomial_log_pmf(int k, int n, double log_p, double log_1mp) {
  if (k < 0 || k > n) return kNegInf;
  return log_binomial_coefficient(n, k) + weighted_log(k, log_p) + weighted_log(n - k, log_1mp);
}

double normalize_log_weights(std::vector<double>& log_weights) {
  const double log_norm = log_sum_exp(log_weights);
  if (!std::isfinite(log_norm)) {
    throw DegenerateError("cannot normalize: every log weight is -inf or the sum overflowed");
  }
  for (double& w : log_weights) w = std::exp(w - log_norm);
  return log_norm;
}

double quantile_type7(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw ValidationError("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace prompt
