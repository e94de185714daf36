#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "unida/error.hpp"
#include "unida/subspace.hpp"

using unida::Matrix;
using unida::Vector;

namespace {

double max_pairwise_distance_error(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = i + 1; j < a.rows(); ++j) {
      const double da = (a.row(i) - a.row(j)).norm();
      const double db = (b.row(i) - b.row(j)).norm();
      worst = std::max(worst, std::abs(da - db));
    }
  return worst;
}

// Data with a decaying spectrum so the principal directions are well separated.
Matrix anisotropic(std::mt19937_64& gen, Eigen::Index n, Eigen::Index m) {
  Matrix z = oracle::random_matrix(gen, n, m);
  for (Eigen::Index j = 0; j < m; ++j) z.col(j) *= std::pow(0.6, static_cast<double>(j));
  return z * oracle::random_orthogonal(gen, m);
}

}  // namespace

TEST(Covariance, TwoPointsOnAxis) {
  Matrix z(2, 2);
  z << 1, 0, -1, 0;
  Matrix expected(2, 2);
  expected << 1, 0, 0, 0;
  EXPECT_TRUE(unida::compute_covariance(z).isApprox(expected));
}

TEST(Covariance, IdenticalRowsGiveZero) {
  Matrix z = Matrix::Constant(5, 3, 0.7);
  EXPECT_EQ(unida::compute_covariance(z).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Covariance, MatchesBruteForce) {
  std::mt19937_64 gen(20);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = oracle::random_matrix(gen, 20, 4);
    const Matrix c = unida::compute_covariance(z);
    EXPECT_LE((c - oracle::covariance(z)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Covariance, TooFewSamples) {
  EXPECT_THROW(unida::compute_covariance(Matrix::Ones(1, 3)), unida::TooFewSamples);
}

TEST(FitProjector, RankOneLine) {
  Matrix z(6, 3);
  Vector dir(3);
  dir << 1, 2, 2;
  dir /= 3.0;
  for (Eigen::Index i = 0; i < 6; ++i) z.row(i) = (static_cast<double>(i) - 2.0) * dir.transpose();
  const auto p = unida::fit_projector(z, unida::EnergyFraction{0.9});
  ASSERT_EQ(p.dim(), 1u);
  EXPECT_NEAR(std::abs(p.basis.col(0).dot(dir)), 1.0, 1e-10);
}

TEST(FitProjector, BasisIsOrthonormalAndSigned) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = oracle::random_matrix(gen, 30, 7);
    const auto p = unida::fit_projector(z, unida::FixedDim{5});
    const Matrix gram = p.basis.transpose() * p.basis;
    EXPECT_LE((gram - Matrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index j = 0; j < p.basis.cols(); ++j) {
      Eigen::Index arg = 0;
      p.basis.col(j).cwiseAbs().maxCoeff(&arg);
      EXPECT_GT(p.basis(arg, j), 0.0);
    }
    for (Eigen::Index i = 1; i < p.singular_values.size(); ++i) {
      EXPECT_GE(p.singular_values(i - 1), p.singular_values(i));
    }
  }
}

TEST(FitProjector, SpansJacobiTopEigenvectors) {
  std::mt19937_64 gen(22);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = anisotropic(gen, 50, 6);
    const auto p = unida::fit_projector(z, unida::FixedDim{3});
    const auto ref = oracle::jacobi(oracle::covariance(z));
    const Matrix top = ref.vectors.leftCols(3);
    // Cosines of the principal angles are the singular values of B1^T B2.
    const auto cosines = oracle::jacobi((p.basis.transpose() * top) *
                                        (p.basis.transpose() * top).transpose());
    for (double c2 : cosines.values) {
      const double angle = std::acos(std::min(1.0, std::sqrt(std::max(0.0, c2))));
      EXPECT_LT(angle, 1e-6);
    }
  }
}

TEST(FitProjector, EnergyPolicyPicksMinimalDimension) {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> frac(0.05, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix z = anisotropic(gen, 40, 8);
    const double e = trial == 0 ? 1.0 : frac(gen);
    const auto p = unida::fit_projector(z, unida::EnergyFraction{e});
    const auto ref = oracle::jacobi(oracle::covariance(z)).values;
    double total = 0.0;
    for (double v : ref) total += std::max(0.0, v);
    double kept = 0.0;
    for (std::size_t i = 0; i < p.dim(); ++i) kept += std::max(0.0, ref[i]);
    const double before = kept - std::max(0.0, ref[p.dim() - 1]);
    EXPECT_GE(kept, e * total - 1e-9 * total);
    EXPECT_LT(before, e * total + 1e-9 * total) << "p=" << p.dim() << " is not minimal";
  }
}

TEST(FitProjector, FullBasisPreservesDistances) {
  std::mt19937_64 gen(24);
  for (int trial = 0; trial < 10; ++trial) {
    const Matrix z = oracle::random_matrix(gen, 25, 6);
    const auto p = unida::fit_projector(z, unida::FixedDim{6});
    const Matrix centered = z.rowwise() - z.colwise().mean();
    EXPECT_LE(max_pairwise_distance_error(unida::project(p, z), centered), 1e-8);
  }
}

TEST(FitProjector, InvalidPolicies) {
  const Matrix z = Matrix::Random(10, 3);
  EXPECT_THROW(unida::fit_projector(z, unida::FixedDim{0}), unida::InvalidArgument);
  EXPECT_THROW(unida::fit_projector(z, unida::FixedDim{4}), unida::InvalidArgument);
  EXPECT_THROW(unida::fit_projector(z, unida::EnergyFraction{0.0}), unida::InvalidArgument);
  EXPECT_THROW(unida::fit_projector(z, unida::EnergyFraction{1.5}), unida::InvalidArgument);
  EXPECT_THROW(unida::fit_projector(Matrix::Ones(1, 3), unida::FixedDim{1}),
               unida::TooFewSamples);
}

TEST(Project, MeanMapsToZero) {
  std::mt19937_64 gen(25);
  const Matrix z = oracle::random_matrix(gen, 30, 5);
  const auto p = unida::fit_projector(z, unida::FixedDim{3});
  const Matrix x = p.mean.transpose().replicate(4, 1);
  EXPECT_LE(unida::project(p, x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Project, FullBasisReconstructs) {
  std::mt19937_64 gen(26);
  const Matrix z = oracle::random_matrix(gen, 30, 5);
  const auto p = unida::fit_projector(z, unida::FixedDim{5});
  const Matrix x = oracle::random_matrix(gen, 7, 5);
  const Matrix back = (unida::project(p, x) * p.basis.transpose()).rowwise() + p.mean.transpose();
  EXPECT_LE((back - x).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Project, SeparatedClustersKeepMargin) {
  std::mt19937_64 gen(27);
  Matrix z(40, 3);
  Vector axis(3);
  axis << 0.6, 0.8, 0.0;
  std::normal_distribution<double> noise(0.0, 0.01);
  for (Eigen::Index i = 0; i < 40; ++i) {
    const double side = i < 20 ? -1.0 : 1.0;
    for (Eigen::Index j = 0; j < 3; ++j) z(i, j) = side * axis(j) + noise(gen);
  }
  const auto p = unida::fit_projector(z, unida::FixedDim{1});
  auto gap = [](const Vector& v) {
    return std::max(v.tail(20).minCoeff() - v.head(20).maxCoeff(),
                    v.head(20).minCoeff() - v.tail(20).maxCoeff());
  };
  const Vector projected = unida::project(p, z).col(0);
  const Vector along = z * axis;
  EXPECT_GT(gap(projected), 0.0);
  EXPECT_NEAR(gap(projected), gap(along), 1e-3);
}

TEST(Project, NonExpansive) {
  std::mt19937_64 gen(28);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix z = oracle::random_matrix(gen, 30, 6);
    const auto p = unida::fit_projector(z, unida::FixedDim{static_cast<std::size_t>(1 + trial % 6)});
    const Matrix x = oracle::random_matrix(gen, 10, 6, 3.0);
    const Matrix y = unida::project(p, x);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      EXPECT_LE(y.row(i).norm(), (x.row(i) - p.mean.transpose()).norm() + 1e-8);
    }
  }
}

TEST(Project, RowOrderDoesNotChangeDistances) {
  std::mt19937_64 gen(29);
  const Matrix z = anisotropic(gen, 40, 5);
  Matrix shuffled = z;
  std::vector<Eigen::Index> order(40);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), gen);
  for (Eigen::Index i = 0; i < 40; ++i) shuffled.row(i) = z.row(order[i]);
  const auto a = unida::fit_projector(z, unida::FixedDim{3});
  const auto b = unida::fit_projector(shuffled, unida::FixedDim{3});
  EXPECT_LE(max_pairwise_distance_error(unida::project(a, z), unida::project(b, z)), 1e-8);
}

TEST(Project, DimensionMismatch) {
  const auto p = unida::identity_projector(3);
  EXPECT_THROW(unida::project(p, Matrix(Matrix::Ones(2, 4))), unida::DimensionMismatch);
  EXPECT_THROW(unida::project(p, Vector(Vector::Ones(2))), unida::DimensionMismatch);
}
