#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace prompt {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;

// log(sum(exp(v))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

inline double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)), accurate in both tails.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

// Product of a weight and a log value where a zero weight annihilates -inf.
inline double weighted_log(double weight, double log_value) {
  return weight == 0.0 ? 0.0 : weight * log_value;
}

double normal_log_pdf(double x, double mean, double sd);
double lognormal_log_pdf(double x, double mu, double sigma);
// Shape/rate parameterization: density proportional to x^(shape-1) exp(-rate x).
double gamma_log_pdf(double x, double shape, double rate);
double log_binomial_coefficient(int n, int k);
double binomial_log_pmf(int k, int n, double log_p, double log_1mp);

// Normalize log weights into probabilities in place; returns the log normalizer.
double normalize_log_weights(std::vector<double>& log_weights);

// Linear interpolation quantile (R type 7) of an already sorted sample.
double quantile_type7(std::span<const double> sorted, double prob);

}  // namespace prompt
