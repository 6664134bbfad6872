#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace rumnet {

// All stochastic paths draw from this engine. Distributions are implemented
// here rather than taken from <random> so that streams are identical across
// standard library implementations.
using Rng = std::mt19937_64;

// Independent stream for (seed, stream) pairs, e.g. (seed, epoch) or
// (seed, event index).
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

// Uniform on [0, 1) with 53 bits of resolution.
double uniform01(Rng& rng);

// Uniform on the open interval (0, 1).
double uniform_open01(Rng& rng);

double uniform(Rng& rng, double lo, double hi);

// Uniform integer in [0, n). Requires n > 0.
std::size_t uniform_index(Rng& rng, std::size_t n);

// Standard Gumbel: -ln(-ln U), U ~ Uniform(0, 1).
double gumbel(Rng& rng);

bool bernoulli(Rng& rng, double p);

}  // namespace rumnet
