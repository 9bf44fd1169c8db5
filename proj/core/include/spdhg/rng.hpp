#pragma once

#include <cstdint>

namespace spdhg {

// Deterministic 64-bit generator (splitmix64). Every randomized routine in
// the library draws through this class, so results are bit-reproducible for
// a given seed regardless of platform or standard-library version.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, 1) with 53-bit resolution.
  double next_double();

  // Unbiased uniform draw from {0, ..., n-1}.
  std::int64_t next_index(std::int64_t n);

  // Standard normal (Box-Muller; consumes two uniforms).
  double next_gaussian();

  // Seed for an independent stream identified by (master, stream).
  static std::uint64_t derive(std::uint64_t master, std::uint64_t stream);

 private:
  std::uint64_t state_;
};

}  // namespace spdhg
