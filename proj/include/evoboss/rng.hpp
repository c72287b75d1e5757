// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace evoboss {

std::uint64_t splitmix64(std::uint64_t x);

// Mixes a base seed with a stream counter; used to give each run in a sweep
// its own seed independent of scheduling.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Counter-based standard normal draw keyed by (seed, a, b, c). Pure function.
double counter_normal(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c);

// mt19937_64 with platform-independent derived distributions. The standard
// library distributions are implementation-defined, so traces would differ
// between libstdc++ and libc++ if we used them.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 random bits.
  double uniform();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace evoboss
