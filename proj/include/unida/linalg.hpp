#pragma once

#include "unida/types.hpp"

namespace unida {

struct SymmetricEigen {
  Vector values;   // non-increasing
  Matrix vectors;  // column j pairs with values(j)
};

// Full eigendecomposition of a symmetric matrix (Householder reduction to
// tridiagonal form, then implicit QL with Wilkinson shifts). Only the lower
// triangle is read. Throws NoConvergence if QL stalls.
SymmetricEigen symmetric_eigen(const Matrix& a);

// True when |a_ij - a_ji| <= tol * max(1, max|a|) for all i, j.
bool is_symmetric(const Matrix& a, double tol = 1e-10);

// Largest eigenvalue of a symmetric matrix. Throws NotSymmetric when the
// input fails is_symmetric(), NoConvergence from the solver.
double max_eigenvalue(const Matrix& s);

}  // namespace unida
