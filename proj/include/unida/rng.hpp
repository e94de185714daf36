#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace unida {

// SplitMix64 step; used to expand seeds and derive independent streams.
std::uint64_t splitmix64(std::uint64_t& state);

// Mixes a seed with any number of stream identifiers into a new seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_a, std::uint64_t stream_b);

/// xoshiro256** 1.0 (Blackman & Vigna), state expanded from a 64-bit seed
/// with SplitMix64. Gaussian draws use the basic Box-Muller transform and
/// consume exactly two uniforms per pair of normals, so streams are
/// reproducible across implementations that follow the same recipe:
///
///   u1 = next_double(), u2 = next_double()
///   r  = sqrt(-2 ln(1 - u1)),  theta = 2 pi u2
///   first normal = r cos(theta), second (cached) = r sin(theta)
///
/// next_double() takes the top 53 bits: (next_u64() >> 11) * 2^-53.
class Xoshiro256 {
 public:
  explicit Xoshiro256(std::uint64_t seed);

  std::uint64_t next_u64();
  double next_double();
  double normal();
  // Uniform integer in [0, n) by rejection on the top bits; n > 0.
  std::uint64_t uniform_index(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    // Fisher-Yates from the back.
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::array<std::uint64_t, 4> s_{};
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace unida
