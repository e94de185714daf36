#include "unida/subspace.hpp"

#include <cmath>
#include <string>

#include "unida/error.hpp"
#include "unida/linalg.hpp"

namespace unida {

Matrix compute_covariance(const Matrix& z) {
  if (z.rows() < 2) throw TooFewSamples("covariance needs at least 2 rows");
  const Eigen::RowVectorXd mean = z.colwise().mean();
  const Matrix centered = z.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(z.rows());
  // Exact symmetry regardless of how the product was blocked.
  return (cov + cov.transpose()) * 0.5;
}

SubspaceProjector fit_projector(const Matrix& z, const ProjectionPolicy& policy) {
  const Matrix cov = compute_covariance(z);
  const auto m = static_cast<std::size_t>(z.cols());

  SymmetricEigen eig;
  try {
    eig = symmetric_eigen(cov);
  } catch (const NoConvergence& e) {
    throw DecompositionFailure(e.what());
  }
  Vector values = eig.values.cwiseMax(0.0);

  std::size_t p = 0;
  if (const auto* fixed = std::get_if<FixedDim>(&policy)) {
    if (fixed->dim < 1 || fixed->dim > m) {
      throw InvalidArgument("fixed dimension " + std::to_string(fixed->dim) + " outside [1, " +
                            std::to_string(m) + "]");
    }
    p = fixed->dim;
  } else {
    const double e = std::get<EnergyFraction>(policy).fraction;
    if (!(e > 0.0 && e <= 1.0)) throw InvalidArgument("energy fraction must be in (0, 1]");
    double total = 0.0;
    for (Eigen::Index j = 0; j < values.size(); ++j) total += values(j);
    double running = 0.0;
    p = m;
    for (std::size_t j = 0; j < m; ++j) {
      running += values(static_cast<Eigen::Index>(j));
      if (running >= e * total) {
        p = j + 1;
        break;
      }
    }
  }

  SubspaceProjector out;
  out.mean = z.colwise().mean().transpose();
  out.basis = eig.vectors.leftCols(static_cast<Eigen::Index>(p));
  for (Eigen::Index j = 0; j < out.basis.cols(); ++j) {
    Eigen::Index arg = 0;
    out.basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.basis(arg, j) < 0) out.basis.col(j) *= -1.0;
  }
  out.singular_values = std::move(values);
  return out;
}

SubspaceProjector identity_projector(std::size_t dim) {
  const auto m = static_cast<Eigen::Index>(dim);
  return SubspaceProjector{Vector::Zero(m), Matrix::Identity(m, m), Vector::Ones(m)};
}

Matrix project(const SubspaceProjector& projector, const Matrix& x) {
  if (static_cast<std::size_t>(x.cols()) != projector.input_dim()) {
    throw DimensionMismatch("input has " + std::to_string(x.cols()) + " columns, projector expects " +
                            std::to_string(projector.input_dim()));
  }
  return (x.rowwise() - projector.mean.transpose()) * projector.basis;
}

Vector project(const SubspaceProjector& projector, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != projector.input_dim()) {
    throw DimensionMismatch("input has " + std::to_string(x.size()) + " entries, projector expects " +
                            std::to_string(projector.input_dim()));
  }
  return projector.basis.transpose() * (x - projector.mean);
}

}  // namespace unida
