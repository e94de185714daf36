#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "unida/types.hpp"

namespace unida {

struct UncertaintyScore {
  int u = 0;      // largest per-class count among the neighbor labels
  int label = 0;  // class attaining it, smallest id on ties
};

// Throws InvalidArgument for an empty list or a label outside [0, num_classes).
UncertaintyScore uncertainty_score(std::span<const int> neighbor_labels, int num_classes);

// ceil(k / 2)
double default_tau(std::size_t k);

struct Partition {
  std::vector<std::size_t> known;
  std::vector<std::size_t> unknown;  // u <= tau
};

Partition partition(std::span<const int> scores, double tau);

struct DeltaFilterResult {
  double delta = 0.0;
  double lambda = 0.0;      // top eigenvalue with the extra source sample
  double lambda_hat = 0.0;  // top eigenvalue with the target sample
  bool keep = true;         // delta <= ratio * lambda
};

/// Spectral compactness check of a target sample against its same-class
/// neighbors. Both sets, [neighbors; extra] and [neighbors; z], are centered
/// and their covariances X^T X / (n' + 1) compared through their largest
/// eigenvalues. Throws TooFewNeighbors for fewer than 2 neighbor rows.
DeltaFilterResult delta_filter(const Vector& z, const Matrix& same_class_neighbors,
                               const Vector& extra_source_sample, double ratio = 0.2);

// Draws the extra same-class source sample for the delta filter.
class SourceSampler {
 public:
  SourceSampler(std::span<const int> labels, int num_classes, std::uint64_t seed);

  // Uniform over members of `cls` not listed in `exclude`; nullopt when every
  // member is excluded. Deterministic in (seed, stream).
  std::optional<std::size_t> draw(int cls, std::span<const std::size_t> exclude,
                                  std::uint64_t stream) const;

 private:
  std::vector<std::vector<std::size_t>> members_;
  std::uint64_t seed_;
};

enum class Verdict { Known, Unknown };

struct UncertaintyAssessment {
  int u = 0;
  int pseudo_label = 0;  // meaningful when verdict == Known
  double r_k = 0.0;
  double delta = 0.0;
  double lambda_max = 0.0;
  double lambda_hat = 0.0;
  Verdict verdict = Verdict::Unknown;
  bool filter_applied = false;
  bool rejected_by_filter = false;
};

struct AssessOptions {
  std::size_t k = 10;
  double tau = 5.0;
  int num_classes = 0;
  bool use_delta_filter = true;
  double delta_ratio = 0.2;
};

/// Known/unknown verdicts for a batch of projected targets against a
/// projected bank snapshot: k-NN, uncertainty score, tau split, then the
/// delta filter on provisional knowns. Samples that fail the filter become
/// Unknown. The filter is skipped (sample kept) when fewer than two
/// neighbors share the pseudo-label or no non-neighbor of that class exists.
///
/// `target_ids` (defaults to 0..b-1) and `batch_stream` seed the extra-sample
/// draws, so results do not depend on how the batch is split across workers.
std::vector<UncertaintyAssessment> assess_batch(const Matrix& targets_sub, const Matrix& bank_sub,
                                                std::span<const int> bank_labels,
                                                const AssessOptions& options,
                                                const SourceSampler& sampler,
                                                std::uint64_t batch_stream = 0,
                                                std::span<const std::size_t> target_ids = {});

}  // namespace unida
