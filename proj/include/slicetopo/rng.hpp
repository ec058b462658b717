// SPDX-License-Identifier: Apache-2.0
//
// Portable draws on top of mt19937_64. The standard distributions are
// implementation-defined, so seeded runs would differ between toolchains.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

namespace slicetopo::rng {

using Engine = std::mt19937_64;

/// Uniform integer in [0, n); n > 0.
inline std::uint64_t below(Engine& e, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - (Engine::max() % n + 1) % n;
  std::uint64_t x = e();
  while (x > limit) x = e();
  return x % n;
}

/// Uniform real in [0, 1) with 53 random bits.
inline double unit(Engine& e) { return static_cast<double>(e() >> 11) * 0x1.0p-53; }

inline double uniform(Engine& e, double lo, double hi) { return lo + (hi - lo) * unit(e); }

/// Box-Muller, one draw per call.
inline double normal(Engine& e) {
  double u = unit(e);
  while (u <= 0.0) u = unit(e);
  return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * unit(e));
}

template <class It>
void shuffle(It first, It last, Engine& e) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = below(e, i);
    using std::swap;
    swap(first[static_cast<std::ptrdiff_t>(i - 1)], first[static_cast<std::ptrdiff_t>(j)]);
  }
}

}  // namespace slicetopo::rng
