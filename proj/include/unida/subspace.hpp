#pragma once

#include <cstddef>
#include <variant>

#include "unida/types.hpp"

namespace unida {

// Keep exactly `dim` principal directions.
struct FixedDim {
  std::size_t dim = 1;
};

// Keep the fewest directions whose eigenvalues sum to at least
// `fraction` of the total.
struct EnergyFraction {
  double fraction = 0.9;
};

using ProjectionPolicy = std::variant<FixedDim, EnergyFraction>;

/// Linear map onto the top principal directions of a feature set.
///
/// basis is m x p with orthonormal columns; each column is signed so that
/// its largest-magnitude entry is positive. singular_values holds all m
/// covariance eigenvalues (clamped at zero) in non-increasing order.
struct SubspaceProjector {
  Vector mean;
  Matrix basis;
  Vector singular_values;

  std::size_t input_dim() const { return static_cast<std::size_t>(basis.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(basis.cols()); }
};

// (1/n) Zc^T Zc with Zc the column-centered input. Throws TooFewSamples for n < 2.
Matrix compute_covariance(const Matrix& z);

// Throws TooFewSamples, InvalidArgument (bad p or fraction) or
// DecompositionFailure.
SubspaceProjector fit_projector(const Matrix& z, const ProjectionPolicy& policy);

// Zero mean and the identity basis: distances are those of the input space.
SubspaceProjector identity_projector(std::size_t dim);

// (X - mean) * basis. Throws DimensionMismatch.
Matrix project(const SubspaceProjector& projector, const Matrix& x);
Vector project(const SubspaceProjector& projector, const Vector& x);

}  // namespace unida
