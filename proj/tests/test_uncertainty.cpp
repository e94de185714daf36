#include <gtest/gtest.h>

#include <cstdlib>

#include "support/oracles.hpp"
#include "unida/error.hpp"
#include "unida/membank.hpp"
#include "unida/uncertainty.hpp"

using unida::Matrix;
using unida::Vector;

TEST(UncertaintyScore, Examples) {
  auto s = unida::uncertainty_score(std::vector<int>{1, 1, 2}, 3);
  EXPECT_EQ(s.u, 2);
  EXPECT_EQ(s.label, 1);
  s = unida::uncertainty_score(std::vector<int>{4, 4, 4, 4, 4}, 5);
  EXPECT_EQ(s.u, 5);
  EXPECT_EQ(s.label, 4);
  std::vector<int> balanced;
  for (int q = 0; q < 3; ++q)
    for (int c = 0; c < 4; ++c) balanced.push_back(c);
  s = unida::uncertainty_score(balanced, 4);
  EXPECT_EQ(s.u, 3);
  EXPECT_EQ(s.label, 0);
}

TEST(UncertaintyScore, MatchesHistogramOracle) {
  std::mt19937_64 gen(40);
  std::uniform_int_distribution<int> cdist(1, 12);
  std::uniform_int_distribution<std::size_t> kdist(1, 40);
  for (int trial = 0; trial < 1000; ++trial) {
    const int c = cdist(gen);
    const auto labels = oracle::random_labels(gen, kdist(gen), c);
    const auto got = unida::uncertainty_score(labels, c);
    const auto [u, label] = oracle::label_histogram_max(labels, c);
    ASSERT_EQ(got.u, u);
    ASSERT_EQ(got.label, label);
  }
}

TEST(UncertaintyScore, RelabelingInvariance) {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const auto labels = oracle::random_labels(gen, 10, 6);
    std::vector<int> perm{0, 1, 2, 3, 4, 5};
    std::shuffle(perm.begin(), perm.end(), gen);
    std::vector<int> mapped;
    for (int l : labels) mapped.push_back(perm[l]);
    const auto a = unida::uncertainty_score(labels, 6);
    const auto b = unida::uncertainty_score(mapped, 6);
    EXPECT_EQ(a.u, b.u);
    // The permuted argmax attains the same count even when ties pick another id.
    EXPECT_EQ(std::count(mapped.begin(), mapped.end(), perm[a.label]), b.u);
  }
}

TEST(UncertaintyScore, Preconditions) {
  EXPECT_THROW(unida::uncertainty_score(std::vector<int>{}, 3), unida::InvalidArgument);
  EXPECT_THROW(unida::uncertainty_score(std::vector<int>{3}, 3), unida::InvalidArgument);
}

TEST(Partition, Examples) {
  auto p = unida::partition(std::vector<int>{3, 7, 5}, 5);
  EXPECT_EQ(p.known, (std::vector<std::size_t>{1}));
  EXPECT_EQ(p.unknown, (std::vector<std::size_t>{0, 2}));
  p = unida::partition(std::vector<int>{1, 4, 2}, 0);
  EXPECT_EQ(p.known.size(), 3u);
  p = unida::partition(std::vector<int>{10, 4, 2}, 10);
  EXPECT_EQ(p.unknown.size(), 3u);
  EXPECT_THROW(unida::partition(std::vector<int>{1}, -1), unida::InvalidArgument);
  EXPECT_EQ(unida::default_tau(10), 5.0);
  EXPECT_EQ(unida::default_tau(7), 4.0);
}

TEST(DeltaFilter, TargetEqualToExtraSample) {
  std::mt19937_64 gen(42);
  const Matrix nb = oracle::random_matrix(gen, 5, 3);
  const Vector z = oracle::random_vector(gen, 3);
  const auto r = unida::delta_filter(z, nb, z);
  EXPECT_EQ(r.delta, 0.0);
  EXPECT_TRUE(r.keep);
}

TEST(DeltaFilter, IdenticalNeighborsClosedForm) {
  // n copies of a point plus one point at distance d: top eigenvalue n d^2 / (n+1)^2.
  const int n = 4;
  const Matrix nb = Matrix::Zero(n, 2);
  Vector extra(2);
  extra << 0.1, 0.0;
  Vector z(2);
  z << 0.0, 2.0;
  const auto r = unida::delta_filter(z, nb, extra);
  EXPECT_NEAR(r.lambda, n * 0.01 / 25.0, 1e-15);
  EXPECT_NEAR(r.lambda_hat, n * 4.0 / 25.0, 1e-15);
  EXPECT_NEAR(r.delta, r.lambda_hat - r.lambda, 1e-15);
  EXPECT_FALSE(r.keep);
}

TEST(DeltaFilter, MatchesJacobiOracle) {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix nb = oracle::random_matrix(gen, 5, 4);
    const Vector z = oracle::random_vector(gen, 4);
    const Vector extra = oracle::random_vector(gen, 4);
    Matrix with_extra(6, 4);
    with_extra << nb, extra.transpose();
    Matrix with_z(6, 4);
    with_z << nb, z.transpose();
    const double lambda = oracle::top_scatter_eigenvalue(with_extra);
    const double lambda_hat = oracle::top_scatter_eigenvalue(with_z);
    const auto r = unida::delta_filter(z, nb, extra);
    EXPECT_NEAR(r.lambda, lambda, 1e-8);
    EXPECT_NEAR(r.lambda_hat, lambda_hat, 1e-8);
    EXPECT_NEAR(r.delta, std::abs(lambda - lambda_hat), 1e-8);
    EXPECT_EQ(r.keep, r.delta <= 0.2 * r.lambda);
  }
}

TEST(DeltaFilter, KeepIsMonotoneInRatio) {
  std::mt19937_64 gen(44);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix nb = oracle::random_matrix(gen, 4, 3);
    const Vector z = oracle::random_vector(gen, 3);
    const Vector extra = oracle::random_vector(gen, 3);
    bool kept = false;
    for (double ratio = 0.0; ratio <= 3.0; ratio += 0.05) {
      const bool keep = unida::delta_filter(z, nb, extra, ratio).keep;
      EXPECT_TRUE(keep || !kept) << "raising the ratio flipped keep to reject";
      kept = kept || keep;
    }
  }
}

TEST(DeltaFilter, Preconditions) {
  EXPECT_THROW(unida::delta_filter(Vector::Zero(2), Matrix::Zero(1, 2), Vector::Zero(2)),
               unida::TooFewNeighbors);
  EXPECT_THROW(unida::delta_filter(Vector::Zero(3), Matrix::Zero(3, 2), Vector::Zero(2)),
               unida::DimensionMismatch);
}

TEST(SourceSampler, ExcludesNeighborsAndIsDeterministic) {
  const std::vector<int> labels{0, 1, 0, 0, 1, 0};
  const unida::SourceSampler sampler(labels, 2, 7);
  const std::vector<std::size_t> exclude{0, 2};
  for (std::uint64_t stream = 0; stream < 50; ++stream) {
    const auto idx = sampler.draw(0, exclude, stream);
    ASSERT_TRUE(idx);
    EXPECT_TRUE(*idx == 3 || *idx == 5);
    EXPECT_EQ(sampler.draw(0, exclude, stream), idx);
  }
  const std::vector<std::size_t> all{1, 4};
  EXPECT_FALSE(sampler.draw(1, all, 0));
  EXPECT_FALSE(sampler.draw(5, {}, 0));
}

namespace {

// Two tight source classes on either side of the origin, plus a third far
// away to give the bank some spread.
struct Toy {
  Matrix bank;
  std::vector<int> labels;
};

Toy toy(std::mt19937_64& gen) {
  Toy t;
  t.bank = Matrix(60, 3);
  std::normal_distribution<double> noise(0.0, 0.01);
  for (Eigen::Index i = 0; i < 60; ++i) {
    const int c = static_cast<int>(i / 20);
    Vector center = Vector::Zero(3);
    center(c) = 1.0;
    for (Eigen::Index j = 0; j < 3; ++j) t.bank(i, j) = center(j) + noise(gen);
    t.labels.push_back(c);
  }
  return t;
}

}  // namespace

TEST(AssessBatch, TargetOnSourcePointIsKnown) {
  std::mt19937_64 gen(45);
  const Toy t = toy(gen);
  const unida::SourceSampler sampler(t.labels, 3, 1);
  unida::AssessOptions opt;
  opt.k = 10;
  opt.tau = 5;
  opt.num_classes = 3;
  // Isotropic noise makes the spectral check strict; a loose ratio isolates the vote.
  opt.delta_ratio = 10.0;
  const Matrix targets = t.bank.row(25);
  const auto a = unida::assess_batch(targets, t.bank, t.labels, opt, sampler);
  EXPECT_EQ(a[0].verdict, unida::Verdict::Known);
  EXPECT_EQ(a[0].pseudo_label, 1);
  EXPECT_EQ(a[0].u, 10);
  EXPECT_TRUE(a[0].filter_applied);
}

TEST(AssessBatch, EquidistantTargetIsUnknownWithoutFilter) {
  // Four classes at the corners of a square, target in the middle.
  Matrix bank(8, 2);
  bank << 1, 0, 1.01, 0, 0, 1, 0, 1.01, -1, 0, -1.01, 0, 0, -1, 0, -1.01;
  const std::vector<int> labels{0, 0, 1, 1, 2, 2, 3, 3};
  const unida::SourceSampler sampler(labels, 4, 1);
  unida::AssessOptions opt;
  opt.k = 4;
  opt.tau = 2;
  opt.num_classes = 4;
  const auto a = unida::assess_batch(Matrix::Zero(1, 2), bank, labels, opt, sampler);
  EXPECT_EQ(a[0].verdict, unida::Verdict::Unknown);
  EXPECT_LE(a[0].u, 2);
  EXPECT_FALSE(a[0].filter_applied);
}

TEST(AssessBatch, FarTargetWithPureNeighborsIsFiltered) {
  std::mt19937_64 gen(46);
  const Toy t = toy(gen);
  const unida::SourceSampler sampler(t.labels, 3, 1);
  unida::AssessOptions opt;
  opt.num_classes = 3;
  Matrix target(1, 3);
  target << 3.0, 0.0, 0.0;  // beyond class 0 along its axis
  const auto a = unida::assess_batch(target, t.bank, t.labels, opt, sampler);
  EXPECT_EQ(a[0].u, 10);
  EXPECT_TRUE(a[0].rejected_by_filter);
  EXPECT_EQ(a[0].verdict, unida::Verdict::Unknown);
}

TEST(AssessBatch, InvariantUnderOrthogonalTransformAndWorkerCount) {
  std::mt19937_64 gen(47);
  const Matrix bank = oracle::random_matrix(gen, 200, 5);
  const auto labels = oracle::random_labels(gen, 200, 4);
  const Matrix targets = oracle::random_matrix(gen, 64, 5);
  const Matrix r = oracle::random_orthogonal(gen, 5);
  const unida::SourceSampler sampler(labels, 4, 3);
  unida::AssessOptions opt;
  opt.k = 7;
  opt.tau = 3;
  opt.num_classes = 4;
  setenv("UNIDA_THREADS", "1", 1);
  const auto single = unida::assess_batch(targets, bank, labels, opt, sampler, 99);
  setenv("UNIDA_THREADS", "4", 1);
  const auto multi = unida::assess_batch(targets, bank, labels, opt, sampler, 99);
  const auto rotated = unida::assess_batch(targets * r, bank * r, labels, opt, sampler, 99);
  unsetenv("UNIDA_THREADS");
  for (std::size_t i = 0; i < single.size(); ++i) {
    EXPECT_EQ(single[i].verdict, multi[i].verdict);
    EXPECT_EQ(single[i].delta, multi[i].delta);
    EXPECT_EQ(single[i].verdict, rotated[i].verdict);
    EXPECT_EQ(single[i].u, rotated[i].u);
    EXPECT_NEAR(single[i].delta, rotated[i].delta, 1e-9);
    if (single[i].verdict == unida::Verdict::Known) EXPECT_GT(single[i].u, opt.tau);
    EXPECT_LE(single[i].u, 7);
    EXPECT_GE(single[i].delta, 0.0);
    EXPECT_GE(single[i].lambda_max, 0.0);
  }
}

TEST(AssessBatch, TargetIdsFixTheExtraSampleDraws) {
  std::mt19937_64 gen(48);
  const Matrix bank = oracle::random_matrix(gen, 100, 3, 0.3);
  std::vector<int> labels(100, 0);
  for (std::size_t i = 50; i < 100; ++i) labels[i] = 1;
  const Matrix targets = oracle::random_matrix(gen, 10, 3, 0.3);
  const unida::SourceSampler sampler(labels, 2, 3);
  unida::AssessOptions opt;
  opt.num_classes = 2;
  opt.tau = 0;
  std::vector<std::size_t> ids(10);
  for (std::size_t i = 0; i < 10; ++i) ids[i] = 100 + i;
  const auto whole = unida::assess_batch(targets, bank, labels, opt, sampler, 5, ids);
  const std::vector<std::size_t> tail_ids(ids.begin() + 5, ids.end());
  const auto tail = unida::assess_batch(targets.bottomRows(5), bank, labels, opt, sampler, 5, tail_ids);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(whole[5 + i].delta, tail[i].delta);
}
