#include "unida/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unida/error.hpp"
#include "unida/linalg.hpp"
#include "unida/membank.hpp"
#include "unida/parallel.hpp"
#include "unida/rng.hpp"

namespace unida {

UncertaintyScore uncertainty_score(std::span<const int> neighbor_labels, int num_classes) {
  if (neighbor_labels.empty()) throw InvalidArgument("uncertainty score needs k >= 1 labels");
  std::vector<int> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (int label : neighbor_labels) {
    if (label < 0 || label >= num_classes) {
      throw InvalidArgument("neighbor label " + std::to_string(label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
    ++counts[static_cast<std::size_t>(label)];
  }
  // max_element returns the first maximum, i.e. the smallest class id.
  const auto best = std::max_element(counts.begin(), counts.end());
  return UncertaintyScore{*best, static_cast<int>(best - counts.begin())};
}

double default_tau(std::size_t k) { return std::ceil(static_cast<double>(k) / 2.0); }

Partition partition(std::span<const int> scores, double tau) {
  if (!(tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  Partition out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (scores[i] <= tau ? out.unknown : out.known).push_back(i);
  }
  return out;
}

namespace {

double top_eigenvalue_of_scatter(const Matrix& rows) {
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Matrix centered = rows.rowwise() - mean;
  Matrix cov = (centered.transpose() * centered) / static_cast<double>(rows.rows());
  cov = (cov + cov.transpose()) * 0.5;
  return std::max(0.0, max_eigenvalue(cov));
}

}  // namespace

DeltaFilterResult delta_filter(const Vector& z, const Matrix& same_class_neighbors,
                               const Vector& extra_source_sample, double ratio) {
  const Eigen::Index n = same_class_neighbors.rows();
  if (n < 2) throw TooFewNeighbors("delta filter needs at least 2 same-class neighbors");
  const Eigen::Index m = same_class_neighbors.cols();
  if (z.size() != m || extra_source_sample.size() != m) {
    throw DimensionMismatch("delta filter vectors must match the neighbor width");
  }
  Matrix with_source(n + 1, m);
  with_source.topRows(n) = same_class_neighbors;
  with_source.row(n) = extra_source_sample.transpose();
  Matrix with_target = with_source;
  with_target.row(n) = z.transpose();

  DeltaFilterResult out;
  out.lambda = top_eigenvalue_of_scatter(with_source);
  out.lambda_hat = top_eigenvalue_of_scatter(with_target);
  out.delta = std::abs(out.lambda - out.lambda_hat);
  out.keep = out.delta <= ratio * out.lambda;
  return out;
}

SourceSampler::SourceSampler(std::span<const int> labels, int num_classes, std::uint64_t seed)
    : members_(static_cast<std::size_t>(std::max(num_classes, 0))), seed_(seed) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int label = labels[i];
    if (label < 0 || label >= num_classes) {
      throw InvalidArgument("source label " + std::to_string(label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
    members_[static_cast<std::size_t>(label)].push_back(i);
  }
}

std::optional<std::size_t> SourceSampler::draw(int cls, std::span<const std::size_t> exclude,
                                               std::uint64_t stream) const {
  if (cls < 0 || static_cast<std::size_t>(cls) >= members_.size()) return std::nullopt;
  std::vector<std::size_t> excluded(exclude.begin(), exclude.end());
  std::sort(excluded.begin(), excluded.end());
  std::vector<std::size_t> candidates;
  for (std::size_t idx : members_[static_cast<std::size_t>(cls)]) {
    if (!std::binary_search(excluded.begin(), excluded.end(), idx)) candidates.push_back(idx);
  }
  if (candidates.empty()) return std::nullopt;
  Xoshiro256 rng(derive_seed(seed_, stream));
  return candidates[static_cast<std::size_t>(rng.uniform_index(candidates.size()))];
}

std::vector<UncertaintyAssessment> assess_batch(const Matrix& targets_sub, const Matrix& bank_sub,
                                                std::span<const int> bank_labels,
                                                const AssessOptions& options,
                                                const SourceSampler& sampler,
                                                std::uint64_t batch_stream,
                                                std::span<const std::size_t> target_ids) {
  if (targets_sub.cols() != bank_sub.cols()) {
    throw DimensionMismatch("targets and bank must be projected with the same projector");
  }
  if (!target_ids.empty() && target_ids.size() != static_cast<std::size_t>(targets_sub.rows())) {
    throw LengthMismatch("target_ids must have one entry per target row");
  }
  if (!(options.tau >= 0.0)) throw InvalidArgument("tau must be non-negative");
  const auto b = static_cast<std::size_t>(targets_sub.rows());
  std::vector<UncertaintyAssessment> out(b);

  parallel_for(b, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Vector z = targets_sub.row(static_cast<Eigen::Index>(i)).transpose();
      const NeighborList nn = knn_query(bank_sub, bank_labels, z, options.k);
      const UncertaintyScore score = uncertainty_score(nn.labels, options.num_classes);

      UncertaintyAssessment& a = out[i];
      a.u = score.u;
      a.pseudo_label = score.label;
      a.r_k = nn.radius();
      a.verdict = score.u <= options.tau ? Verdict::Unknown : Verdict::Known;
      if (a.verdict == Verdict::Unknown || !options.use_delta_filter) continue;

      std::vector<Eigen::Index> same;
      for (std::size_t j = 0; j < nn.size(); ++j) {
        if (nn.labels[j] == score.label) same.push_back(static_cast<Eigen::Index>(nn.indices[j]));
      }
      if (same.size() < 2) continue;
      const std::uint64_t id = target_ids.empty() ? i : target_ids[i];
      const auto extra = sampler.draw(score.label, nn.indices, derive_seed(batch_stream, id));
      if (!extra) continue;

      Matrix neighbors(static_cast<Eigen::Index>(same.size()), bank_sub.cols());
      for (std::size_t j = 0; j < same.size(); ++j) {
        neighbors.row(static_cast<Eigen::Index>(j)) = bank_sub.row(same[j]);
      }
      const DeltaFilterResult f = delta_filter(
          z, neighbors, bank_sub.row(static_cast<Eigen::Index>(*extra)).transpose(),
          options.delta_ratio);
      a.filter_applied = true;
      a.delta = f.delta;
      a.lambda_max = f.lambda;
      a.lambda_hat = f.lambda_hat;
      if (!f.keep) {
        a.rejected_by_filter = true;
        a.verdict = Verdict::Unknown;
      }
    }
  });
  return out;
}

}  // namespace unida
