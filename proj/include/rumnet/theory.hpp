#pragma once

// Closed-form calculators for the RUMnet learning-theory bounds. All
// logarithms are natural.

#include <cstddef>
#include <cstdint>

namespace rumnet {

struct BoundInputs {
  std::size_t kappa = 1;
  std::size_t T = 1;
  double M = 0.0;
  std::size_t ell = 0;
  double delta = 0.05;
  double c1 = 1.0;
  double c2 = 1.0;

  void validate() const;
};

struct GapTerms {
  // c1 * kappa^{3/2} / sqrt(T) * e^{2M} * M^ell
  double complexity = 0.0;
  // 4 * c2 * sqrt(2 ln(4/delta) / T)
  double confidence = 0.0;

  double total() const noexcept { return complexity + confidence; }
};

// Generalisation gap between true and empirical loss of the ERM estimate.
// M^ell uses the convention 0^0 = 1.
GapTerms generalization_gap_terms(const BoundInputs& b);
double generalization_gap(const BoundInputs& b);

// Number of latent samples K' sufficient to approximate a K-sample RUMnet
// to within epsilon:
//   ceil( ln(1/delta) / (2 eps^2) * (kappa e^{2M})^2
//         * ln ceil( 16 / (max(c1^2, c2^2) eps^2) * kappa^3 e^{4M} M^{2 ell} ) )
// Throws std::domain_error when the inner ceiling is below 2.
std::uint64_t compact_K(double epsilon, const BoundInputs& b);

// Lower bound e^{-2M} / kappa on any choice probability when every utility
// lies in [-M, M].
double pmin_bound(std::size_t kappa, double M);

}  // namespace rumnet
