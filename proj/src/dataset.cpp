#include "unida/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unida/error.hpp"

namespace unida {

int FeatureSet::num_classes() const {
  if (!labels || labels->empty()) return 0;
  return *std::max_element(labels->begin(), labels->end()) + 1;
}

FeatureSet make_feature_set(Matrix features, std::optional<std::vector<int>> labels) {
  if (features.rows() == 0 || features.cols() == 0) {
    throw FormatError("feature matrix must have at least one row and one column");
  }
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    if (!features.row(i).allFinite()) {
      throw NonFinite("row " + std::to_string(i) + " contains NaN or Inf");
    }
  }
  if (labels) {
    if (labels->size() != static_cast<std::size_t>(features.rows())) {
      throw LengthMismatch("got " + std::to_string(labels->size()) + " labels for " +
                           std::to_string(features.rows()) + " rows");
    }
    for (std::size_t i = 0; i < labels->size(); ++i) {
      if ((*labels)[i] < 0) {
        throw FormatError("negative label at row " + std::to_string(i));
      }
    }
  }
  return FeatureSet{std::move(features), std::move(labels)};
}

Matrix normalize_rows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double norm = x.row(i).norm();
    if (!(norm >= 1e-12)) throw ZeroRow(static_cast<std::size_t>(i));
    out.row(i) = x.row(i) / norm;
  }
  return out;
}

FeatureSet normalized(const FeatureSet& set) {
  return FeatureSet{normalize_rows(set.features), set.labels};
}

std::size_t ScenarioTruth::unknown_count() const {
  return static_cast<std::size_t>(
      std::count(target_unknown_mask.begin(), target_unknown_mask.end(), true));
}

}  // namespace unida
