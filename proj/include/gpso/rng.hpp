#pragma once

#include <cstdint>
#include <vector>

#include "gpso/error.hpp"

namespace gpso {

// splitmix64 step. Fully specified arithmetic, identical on every platform,
// unlike the std:: distribution templates.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Mixes an ordered tuple of 64-bit values into one seed. Used everywhere a
// derived stream is needed: (master, problem, pattern, k) -> trajectory seed.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t s = 0x243f6a8885a308d3ull;  // arbitrary odd constant
  for (std::uint64_t p : parts) {
    s ^= p + 0x9e3779b97f4a7c15ull + (s << 6) + (s >> 2);
    std::uint64_t st = s;
    s = splitmix64(st);
  }
  return s;
}

// Deterministic 64-bit stream. Every random draw in the library goes through
// this type so results depend only on the seed, never on the platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). Rejection-free modulo is fine at these ranges;
  // bias is < 2^-40 for n below a million.
  std::uint64_t next_below(std::uint64_t n) {
    if (n == 0) throw InputError("Rng::next_below: n must be positive");
    return next_u64() % n;
  }

  // Uniform in [lo, hi).
  double next_range(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  bool next_bernoulli(double p) { return next_double() < p; }

  // Index draw from unnormalized nonnegative weights.
  std::size_t next_categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw InputError("Rng::next_categorical: negative weight");
      total += w;
    }
    if (total <= 0.0) throw InputError("Rng::next_categorical: weights sum to zero");
    double u = next_double() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return weights.size() - 1;
  }

 private:
  std::uint64_t state_;
};

}  // namespace gpso
