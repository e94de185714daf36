#include "unida/membank.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>
#include <utility>

#include "unida/error.hpp"

namespace unida {

MemoryBank::MemoryBank(const FeatureSet& source, double alpha)
    : slots_(source.features), alpha_(alpha), num_classes_(source.num_classes()) {
  if (!source.labels) throw MissingLabels("memory bank needs a labeled source set");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw BadAlpha("momentum must lie in [0, 1], got " + std::to_string(alpha));
  }
  labels_ = *source.labels;
}

void MemoryBank::update_slot(std::size_t index, const Vector& feature) {
  if (index >= size()) {
    throw IndexOutOfRange("slot " + std::to_string(index) + " of " + std::to_string(size()));
  }
  if (static_cast<std::size_t>(feature.size()) != dim()) {
    throw DimensionMismatch("feature has " + std::to_string(feature.size()) + " entries, bank " +
                            std::to_string(dim()));
  }
  const auto row = static_cast<Eigen::Index>(index);
  Vector mixed = alpha_ * slots_.row(row).transpose() + (1.0 - alpha_) * feature;
  const double norm = mixed.norm();
  // Antipodal mix at alpha = 1/2 cancels out; the incoming feature wins.
  if (norm > 1e-12) {
    slots_.row(row) = (mixed / norm).transpose();
  } else {
    slots_.row(row) = feature.normalized().transpose();
  }
}

MemoryBank init_bank(const FeatureSet& source, double alpha) { return MemoryBank(source, alpha); }

NeighborList knn_query(const Matrix& bank, std::span<const int> labels, const Vector& query,
                       std::size_t k) {
  const auto n = static_cast<std::size_t>(bank.rows());
  if (k < 1 || k > n) {
    throw KTooLarge("k = " + std::to_string(k) + " with " + std::to_string(n) + " bank rows");
  }
  if (labels.size() != n) throw DimensionMismatch("labels and bank rows differ");
  if (query.size() != bank.cols()) throw DimensionMismatch("query width differs from bank");

  // Max-heap on (squared distance, index) holding the k best seen so far.
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry> heap;
  for (std::size_t i = 0; i < n; ++i) {
    const double d2 = (bank.row(static_cast<Eigen::Index>(i)).transpose() - query).squaredNorm();
    if (heap.size() < k) {
      heap.emplace(d2, i);
    } else if (Entry{d2, i} < heap.top()) {
      heap.pop();
      heap.emplace(d2, i);
    }
  }
  std::vector<Entry> best;
  best.reserve(k);
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::reverse(best.begin(), best.end());

  NeighborList out;
  out.indices.reserve(k);
  out.distances.reserve(k);
  out.labels.reserve(k);
  for (const auto& [d2, i] : best) {
    out.indices.push_back(i);
    out.distances.push_back(std::sqrt(d2));
    out.labels.push_back(labels[i]);
  }
  return out;
}

}  // namespace unida
