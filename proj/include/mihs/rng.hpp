#pragma once

#include <array>
#include <cstdint>

namespace mihs {

// Deterministic xoshiro256++ stream, seeded through splitmix64.
// Hand-rolled (rather than <random> distributions) so that equal seeds give
// bit-identical sequences on every platform/standard library.
class RngState {
public:
  explicit RngState(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  // Uniform on [lo, hi).
  double uniform(double lo, double hi);
  // Unbiased integer in [0, bound), bound >= 1.
  std::uint64_t uniform_int(std::uint64_t bound);
  // Standard normal via Box-Muller (second deviate cached).
  double normal();
  // +1 or -1 with equal probability.
  double rademacher();

  std::uint64_t seed() const { return seed_; }

private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Deterministic child stream for (seed, index) pairs; used for Monte-Carlo
// trials and per-probe streams so parallel order never matters.
std::uint64_t child_seed(std::uint64_t seed, std::uint64_t index);

} // namespace mihs
