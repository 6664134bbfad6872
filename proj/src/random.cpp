#include "rumnet/random.hpp"

#include <cmath>

namespace rumnet {

Rng derive_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform_open01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

__extension__ typedef unsigned __int128 u128;

std::size_t uniform_index(Rng& rng, std::size_t n) {
  // Lemire's multiply-shift with rejection; unbiased for any n.
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - range) % range;
  while (true) {
    const std::uint64_t x = rng();
    const auto m = static_cast<u128>(x) * range;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return static_cast<std::size_t>(m >> 64);
    }
  }
}

double gumbel(Rng& rng) {
  return -std::log(-std::log(uniform_open01(rng)));
}

bool bernoulli(Rng& rng, double p) {
  return uniform01(rng) < p;
}

}  // namespace rumnet
