// SPDX-License-Identifier: Apache-2.0
#include "evoboss/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace evoboss {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

namespace {

// (0, 1], never zero so the log in Box-Muller stays finite.
double unit_open(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t key = splitmix64(seed);
  key = splitmix64(key ^ a);
  key = splitmix64(key ^ (b + 0x632be59bd9b4e019ULL));
  // Each Box-Muller pair serves two consecutive components.
  std::uint64_t pair_key = splitmix64(key ^ ((c >> 1) + 0x85ebca6b));
  double u1 = unit_open(splitmix64(pair_key));
  double u2 = unit_open(splitmix64(pair_key ^ 0xc2b2ae3d27d4eb4fULL));
  double radius = std::sqrt(-2.0 * std::log(u1));
  double angle = 2.0 * std::numbers::pi * u2;
  return (c & 1U) ? radius * std::sin(angle) : radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling on the top of the range keeps the draw unbiased.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace evoboss
