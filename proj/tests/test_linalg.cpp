#include <gtest/gtest.h>

#include "support/oracles.hpp"
#include "unida/error.hpp"
#include "unida/linalg.hpp"

using unida::Matrix;

namespace {

Matrix random_symmetric(std::mt19937_64& gen, Eigen::Index n) {
  const Matrix a = oracle::random_matrix(gen, n, n);
  return (a + a.transpose()) * 0.5;
}

Matrix random_psd(std::mt19937_64& gen, Eigen::Index n) {
  const Matrix a = oracle::random_matrix(gen, n, n);
  return a * a.transpose();
}

}  // namespace

TEST(SymmetricEigen, MatchesJacobiOracle) {
  std::mt19937_64 gen(10);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 9;
    const Matrix a = random_symmetric(gen, n);
    const auto got = unida::symmetric_eigen(a);
    const auto ref = oracle::jacobi(a);
    for (Eigen::Index i = 0; i < n; ++i) EXPECT_NEAR(got.values(i), ref.values[i], 1e-10);
    // A v = lambda v and orthonormal vectors.
    const Matrix residual = a * got.vectors - got.vectors * got.values.asDiagonal();
    EXPECT_LE(residual.cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((got.vectors.transpose() * got.vectors - Matrix::Identity(n, n)).cwiseAbs().maxCoeff(),
              1e-10);
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_GE(got.values(i - 1), got.values(i));
  }
}

TEST(SymmetricEigen, ReadsLowerTriangleOnly) {
  Matrix a(2, 2);
  a << 2, 100, 1, 2;  // upper entry ignored: [[2,1],[1,2]]
  const auto e = unida::symmetric_eigen(a);
  EXPECT_NEAR(e.values(0), 3.0, 1e-12);
  EXPECT_NEAR(e.values(1), 1.0, 1e-12);
}

TEST(SymmetricEigen, RepeatedEigenvalues) {
  const Matrix a = Matrix::Identity(5, 5) * 2.5;
  const auto e = unida::symmetric_eigen(a);
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_NEAR(e.values(i), 2.5, 1e-14);
}

TEST(MaxEigenvalue, Diagonal) {
  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 3, 1, 2;
  EXPECT_DOUBLE_EQ(unida::max_eigenvalue(d), 3.0);
}

TEST(MaxEigenvalue, ZeroMatrix) { EXPECT_EQ(unida::max_eigenvalue(Matrix::Zero(4, 4)), 0.0); }

TEST(MaxEigenvalue, RandomPsdMatchesJacobi) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Matrix s = random_psd(gen, 6);
    const double ref = oracle::jacobi(s).values.front();
    EXPECT_NEAR(unida::max_eigenvalue(s), ref, 1e-8);
    EXPECT_NEAR(unida::max_eigenvalue(s), ref, 1e-10 * ref);
  }
}

TEST(MaxEigenvalue, RejectsAsymmetric) {
  Matrix a(2, 2);
  a << 1, 2, 3, 4;
  EXPECT_THROW(unida::max_eigenvalue(a), unida::NotSymmetric);
  EXPECT_FALSE(unida::is_symmetric(a));
  Matrix b(2, 2);
  b << 1, 2, 2 + 1e-13, 4;
  EXPECT_TRUE(unida::is_symmetric(b));
}
