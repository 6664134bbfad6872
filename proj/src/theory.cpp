#include "rumnet/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace rumnet {

namespace {

double power_with_zero_convention(double base, double exponent) {
  if (exponent == 0.0) return 1.0;
  return std::pow(base, exponent);
}

}  // namespace

void BoundInputs::validate() const {
  if (kappa < 1) throw std::invalid_argument("bound: kappa must be positive");
  if (T < 1) throw std::invalid_argument("bound: T must be positive");
  if (!(M >= 0.0) || !std::isfinite(M)) throw std::invalid_argument("bound: M must be finite and >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("bound: delta must lie in (0, 1)");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw std::invalid_argument("bound: c1 and c2 must be positive");
}

GapTerms generalization_gap_terms(const BoundInputs& b) {
  b.validate();
  const double kappa = static_cast<double>(b.kappa);
  const double T = static_cast<double>(b.T);
  GapTerms g;
  g.complexity = b.c1 * kappa * std::sqrt(kappa) / std::sqrt(T) * std::exp(2.0 * b.M) *
                 power_with_zero_convention(b.M, static_cast<double>(b.ell));
  g.confidence = 4.0 * b.c2 * std::sqrt(2.0 * std::log(4.0 / b.delta) / T);
  return g;
}

double generalization_gap(const BoundInputs& b) {
  return generalization_gap_terms(b).total();
}

std::uint64_t compact_K(double epsilon, const BoundInputs& b) {
  b.validate();
  if (!(epsilon > 0.0)) throw std::invalid_argument("compact_K: epsilon must be positive");
  const double kappa = static_cast<double>(b.kappa);
  const double c_max = std::max(b.c1 * b.c1, b.c2 * b.c2);
  const double inner = std::ceil(16.0 / (c_max * epsilon * epsilon) * kappa * kappa * kappa *
                                 std::exp(4.0 * b.M) *
                                 power_with_zero_convention(b.M, 2.0 * static_cast<double>(b.ell)));
  if (!(inner >= 2.0)) {
    throw std::domain_error("compact_K: inner ceiling argument below 2 (" + std::to_string(inner) + ")");
  }
  const double scale = kappa * std::exp(2.0 * b.M);
  const double value = std::log(1.0 / b.delta) / (2.0 * epsilon * epsilon) * scale * scale * std::log(inner);
  if (!std::isfinite(value) || value > static_cast<double>(std::numeric_limits<std::uint64_t>::max())) {
    throw std::domain_error("compact_K: value overflows");
  }
  return static_cast<std::uint64_t>(std::ceil(value));
}

double pmin_bound(std::size_t kappa, double M) {
  if (kappa < 1) throw std::invalid_argument("pmin_bound: kappa must be positive");
  return std::exp(-2.0 * M) / static_cast<double>(kappa);
}

}  // namespace rumnet
