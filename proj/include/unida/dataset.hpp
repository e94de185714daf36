#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "unida/types.hpp"

namespace unida {

/// A set of embeddings, one sample per row, with optional class labels.
///
/// Construct through make_feature_set() so the finiteness and label checks
/// run; the members are public so the value can be moved around freely.
struct FeatureSet {
  Matrix features;
  std::optional<std::vector<int>> labels;

  std::size_t size() const { return static_cast<std::size_t>(features.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(features.cols()); }
  bool has_labels() const { return labels.has_value(); }
  // max label + 1, or 0 when unlabeled.
  int num_classes() const;
};

// Validates shape, finiteness and label range (labels must be >= 0).
FeatureSet make_feature_set(Matrix features, std::optional<std::vector<int>> labels = std::nullopt);

// Divides each row by its L2 norm. Throws ZeroRow for rows with norm < 1e-12.
Matrix normalize_rows(const Matrix& x);

// Returns a copy with normalized rows and the same labels.
FeatureSet normalized(const FeatureSet& set);

enum class FeatureFormat { Binary, Csv };

// ".csv" (case-insensitive) selects Csv, anything else Binary.
FeatureFormat format_for_path(const std::filesystem::path& path);

// Binary layout: "UDAF", u32 version (1), u32 n, u32 m, u8 has_labels,
// n*m float32 row-major, then n int32 labels when has_labels. All little-endian.
// CSV layout: header f0,...,f{m-1}[,label], one row per sample.
FeatureSet load_features(const std::filesystem::path& path, FeatureFormat format);
FeatureSet load_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureSet& set, FeatureFormat format);
void write_features(const std::filesystem::path& path, const FeatureSet& set);

struct DomainShift {
  double rotation_angle = 0.0;  // radians, applied in the first two coordinates
  double translation_magnitude = 0.0;
  double scale = 1.0;
};

struct ScenarioConfig {
  std::size_t n_common = 10;
  std::size_t n_source_private = 5;
  std::size_t n_target_private = 10;
  std::size_t samples_per_class = 100;
  std::size_t dim = 32;
  double cluster_std = 0.1;
  std::size_t center_rank = 0;  // 0: centers span all dims
  DomainShift shift;
  std::uint64_t seed = 0;

  // Number of classes the source labels span (common + source-private).
  int num_source_classes() const { return static_cast<int>(n_common + n_source_private); }
  void validate() const;
};

/// Ground truth for the target domain. Target-private samples carry the
/// label num_classes (the unknown code); common samples carry their class.
struct ScenarioTruth {
  std::vector<bool> target_unknown_mask;
  std::vector<int> target_true_labels;
  int num_classes = 0;

  std::size_t size() const { return target_true_labels.size(); }
  std::size_t unknown_count() const;
};

struct Scenario {
  FeatureSet source;
  FeatureSet target;  // unlabeled
  ScenarioTruth truth;
};

/// Builds a labeled source domain and an unlabeled target domain from
/// isotropic Gaussian clusters around unit-norm centers.
///
/// Classes [0, n_common) appear in both domains, [n_common, C) only in the
/// source, and n_target_private extra clusters only in the target. Target
/// copies of the common classes go through the domain shift (rotation in
/// coordinates 0/1, translation along a seeded unit direction, scaling)
/// before every row is normalized. Unknown centers are kept at least
/// 3 * cluster_std away from every common center.
Scenario generate_scenario(const ScenarioConfig& cfg);

// CSV with header index,label,unknown.
void write_truth_csv(const std::filesystem::path& path, const ScenarioTruth& truth);
// When num_classes is absent it is taken from the unknown rows' label; a
// truth file without unknown rows then needs it passed explicitly.
ScenarioTruth load_truth_csv(const std::filesystem::path& path,
                             std::optional<int> num_classes = std::nullopt);

}  // namespace unida
