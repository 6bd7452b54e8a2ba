#pragma once

// Portable random helpers on top of std::mt19937_64.
//
// The engine's output sequence is fixed by the standard, but the standard
// distributions are not, so everything that must reproduce across platforms
// (splits, shuffles, initialization, dropout masks) draws through these.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace credscan {

using Rng = std::mt19937_64;

// Uniform in [0, bound). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

// Uniform in [0, 1) with 53 bits of precision.
inline double uniform_unit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform_unit(rng);
}

// Fisher-Yates, walking from the back.
template <typename T>
void shuffle_in_place(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace credscan
