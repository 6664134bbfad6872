#pragma once

// Ground-truth generators for the synthetic recovery experiments.
//
// Every product carries x = (x1, x2, delta) where delta one-hot encodes the
// product's index in a universe of P products, so d_x = 2 + P. Events carry
// no customer features.
//
//   Setting 1: u = beta' x + eps                         (MNL)
//   Setting 2: u = b1 x1 + b2 x2 + b3 x1^2 + b4 x1 x2 + b5 x2^2 + gamma' delta + eps
//              with x1, x2 ~ U[0, 10]
//   Setting 3: u = b beta' x + (1 - b) gamma' x + eps, b ~ Bernoulli(0.3)
//              drawn once per event

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <variant>
#include <vector>

#include "rumnet/choice_event.hpp"
#include "rumnet/random.hpp"

namespace rumnet {

struct Setting1 {
  std::vector<double> beta;
};

struct Setting2 {
  std::vector<double> beta;
  std::vector<double> gamma;
};

struct Setting3 {
  std::vector<double> beta;
  std::vector<double> gamma;
  double p_class = 0.3;
};

struct GroundTruth {
  std::variant<Setting1, Setting2, Setting3> params;
  std::size_t universe = 0;

  int setting() const noexcept { return static_cast<int>(params.index()) + 1; }
  std::size_t feature_dim() const noexcept { return 2 + universe; }

  void validate() const;
};

GroundTruth draw_ground_truth(int setting, std::size_t universe, Rng& rng);

// T events, each offering kappa distinct products drawn uniformly from the
// universe. Event t uses the stream derive_rng(seed, t). For Setting 3 the
// drawn class indicators b can be captured through `classes`.
Dataset generate(const GroundTruth& gt, std::size_t T, std::size_t kappa, std::uint64_t seed,
                 std::vector<int>* classes = nullptr);

// Closed-form choice probabilities of the generator for one event.
std::vector<double> ground_truth_probabilities(const GroundTruth& gt, const ChoiceEvent& event);

// Mean -ln P(chosen) under the generator's own probabilities.
double ground_truth_loss(const GroundTruth& gt, const Dataset& data);

// Uniform guess over kappa offered alternatives: ln(kappa).
double random_guess_loss(std::size_t kappa);

// Sidecar text describing the parameters and the seed that produced a file.
void write_ground_truth(std::ostream& os, const GroundTruth& gt, std::uint64_t seed);
GroundTruth read_ground_truth(std::istream& is);

}  // namespace rumnet
