#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include "unida/rng.hpp"

namespace {

// Straight transcription of the published reference generators.
struct RefSplitMix {
  std::uint64_t x;
  std::uint64_t next() {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

struct RefXoshiro {
  std::uint64_t s[4];
  explicit RefXoshiro(std::uint64_t seed) {
    RefSplitMix sm{seed};
    for (auto& v : s) v = sm.next();
  }
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST(Rng, SplitMixMatchesReference) {
  RefSplitMix ref{1234567};
  std::uint64_t state = 1234567;
  for (int i = 0; i < 100; ++i) EXPECT_EQ(unida::splitmix64(state), ref.next());
}

TEST(Rng, XoshiroMatchesReference) {
  for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 0xdeadbeefULL}) {
    RefXoshiro ref(seed);
    unida::Xoshiro256 rng(seed);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(rng.next_u64(), ref.next());
  }
}

TEST(Rng, NextDoubleUsesTop53Bits) {
  RefXoshiro ref(7);
  unida::Xoshiro256 rng(7);
  for (int i = 0; i < 100; ++i) {
    const double expected = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
    const double got = rng.next_double();
    EXPECT_EQ(got, expected);
    EXPECT_GE(got, 0.0);
    EXPECT_LT(got, 1.0);
  }
}

TEST(Rng, BoxMullerPairsFromTwoUniforms) {
  RefXoshiro ref(11);
  unida::Xoshiro256 rng(11);
  for (int i = 0; i < 50; ++i) {
    const double u1 = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
    const double u2 = static_cast<double>(ref.next() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    EXPECT_DOUBLE_EQ(rng.normal(), r * std::cos(theta));
    EXPECT_DOUBLE_EQ(rng.normal(), r * std::sin(theta));
  }
}

TEST(Rng, NormalMoments) {
  unida::Xoshiro256 rng(3);
  const int n = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  const double mean = sum / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.02);
}

TEST(Rng, UniformIndexInRangeAndCoversAll) {
  unida::Xoshiro256 rng(5);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = rng.uniform_index(7);
    ASSERT_LT(v, 7u);
    ++counts[v];
  }
  for (int c : counts) EXPECT_GT(c, 800);
}

TEST(Rng, ShuffleIsPermutation) {
  unida::Xoshiro256 rng(9);
  for (std::size_t n : {0u, 1u, 2u, 17u, 100u}) {
    std::vector<std::size_t> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = i;
    rng.shuffle(v);
    std::vector<std::size_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(sorted[i], i);
  }
}

TEST(Rng, SameSeedSameStream) {
  unida::Xoshiro256 a(99);
  unida::Xoshiro256 b(99);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.normal(), b.normal());
}

TEST(Rng, DerivedSeedsAreDistinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t stream = 0; stream < 50; ++stream) {
      seen.insert(unida::derive_seed(s, stream));
      seen.insert(unida::derive_seed(s, stream, 1000 + stream));
    }
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(unida::derive_seed(1, 2), unida::derive_seed(1, 2));
  EXPECT_NE(unida::derive_seed(1, 2, 3), unida::derive_seed(1, 3, 2));
}
