#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "unida/dataset.hpp"
#include "unida/types.hpp"

namespace unida {

/// One unit-norm feature slot per source sample, refreshed by momentum:
/// slot <- normalize(alpha * slot + (1 - alpha) * feature).
///
/// The slot count and labels are fixed at construction. Not thread-safe for
/// writes; readers should work on a projected snapshot (see knn_query).
class MemoryBank {
 public:
  // Throws MissingLabels when the source set is unlabeled, BadAlpha when
  // alpha is outside [0, 1].
  MemoryBank(const FeatureSet& source, double alpha);

  // Throws IndexOutOfRange, DimensionMismatch.
  void update_slot(std::size_t index, const Vector& feature);

  const Matrix& slots() const { return slots_; }
  const std::vector<int>& labels() const { return labels_; }
  double alpha() const { return alpha_; }
  std::size_t size() const { return labels_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(slots_.cols()); }
  int num_classes() const { return num_classes_; }

 private:
  Matrix slots_;
  std::vector<int> labels_;
  double alpha_;
  int num_classes_;
};

MemoryBank init_bank(const FeatureSet& source, double alpha);

struct NeighborList {
  std::vector<std::size_t> indices;
  std::vector<double> distances;  // Euclidean, non-decreasing
  std::vector<int> labels;

  std::size_t size() const { return indices.size(); }
  // Distance to the k-th (last) neighbor.
  double radius() const { return distances.empty() ? 0.0 : distances.back(); }
};

/// Exact k nearest rows of `bank` to `query` by Euclidean distance, ties
/// broken by lower index. Throws KTooLarge unless 1 <= k <= rows,
/// DimensionMismatch on width or label-count mismatch.
NeighborList knn_query(const Matrix& bank, std::span<const int> labels, const Vector& query,
                       std::size_t k);

}  // namespace unida
