#include <cmath>
#include <limits>

#include "prompt/diagnostics.hpp"
#include "prompt/errors.hpp"

namespace prompt {
namespace {

void check_pair(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ValidationError("distributions have different lengths");
  double sp = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0) || !(q[k] >= 0.0)) throw ValidationError("distributions must be nonnegative");
    sp += p[k];
    sq += q[k];
  }
  if (std::abs(sp - 1.0) > 1e-9 || std::abs(sq - 1.0) > 1e-9) {
    throw ValidationError("distributions must be normalized");
  }
}

}  // namespace

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v < 0.0) throw ValidationError("distribution must be nonnegative");
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

Divergence cross_entropy(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  Divergence out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return {std::numeric_limits<double>::infinity(), true};
    out.value -= p[k] * std::log(q[k]);
  }
  return out;
}

Divergence kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_pair(p, q);
  Divergence out;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return {std::numeric_limits<double>::infinity(), true};
    out.value += p[k] * (std::log(p[k]) - std::log(q[k]));
  }
  // Rounding can leave a tiny negative value for p ~ q.
  if (out.value < 0.0 && out.value > -1e-15) out.value = 0.0;
  return out;
}

}  // namespace prompt
