#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string_view>

namespace market {

/// Portable seeded generator. std::mt19937_64's output sequence is fixed by
/// the standard; the helpers below avoid std:: distributions, whose outputs
/// are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, bound). bound must be > 0. Exact (rejection).
  std::uint64_t below(std::uint64_t bound);

  /// Uniform double in [0, 1) with 53 random bits.
  double unit();

  /// Uniform double in (0, 1].
  double unit_open_zero() { return 1.0 - unit(); }

  bool chance(double p) { return unit() < p; }

  std::array<std::uint8_t, 16> bytes16();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for a labeled sub-stream, so that adding draws in one module does
/// not perturb another module's sequence.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label);

inline Rng substream(std::uint64_t seed, std::string_view label) {
  return Rng(derive_seed(seed, label));
}

}  // namespace market
