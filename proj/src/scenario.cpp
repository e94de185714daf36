#include <cmath>
#include <string>

#include "unida/dataset.hpp"
#include "unida/error.hpp"
#include "unida/rng.hpp"

namespace unida {

namespace {

constexpr int kMaxCenterAttempts = 10000;

Vector random_unit(Xoshiro256& rng, std::size_t dim) {
  Vector v(static_cast<Eigen::Index>(dim));
  for (;;) {
    for (Eigen::Index j = 0; j < v.size(); ++j) v(j) = rng.normal();
    const double norm = v.norm();
    if (norm > 1e-12) return v / norm;
  }
}

void apply_shift(Eigen::Ref<Vector> x, const DomainShift& shift, const Vector& direction) {
  const double c = std::cos(shift.rotation_angle);
  const double s = std::sin(shift.rotation_angle);
  const double x0 = x(0);
  const double x1 = x(1);
  x(0) = c * x0 - s * x1;
  x(1) = s * x0 + c * x1;
  x += shift.translation_magnitude * direction;
  x *= shift.scale;
}

}  // namespace

void ScenarioConfig::validate() const {
  if (n_common + n_source_private < 1) {
    throw DegenerateConfig("need at least one source class");
  }
  if (samples_per_class < 2) throw DegenerateConfig("samples_per_class must be >= 2");
  if (dim < 2) throw DegenerateConfig("dim must be >= 2");
  if (center_rank > dim) throw DegenerateConfig("center_rank must not exceed dim");
  if (center_rank == 1) throw DegenerateConfig("center_rank must be 0 or >= 2");
  if (!(cluster_std > 0.0) || !std::isfinite(cluster_std)) {
    throw DegenerateConfig("cluster_std must be positive");
  }
  if (!(shift.scale > 0.0) || !std::isfinite(shift.scale)) {
    throw DegenerateConfig("shift.scale must be positive");
  }
  if (!std::isfinite(shift.rotation_angle) || !std::isfinite(shift.translation_magnitude)) {
    throw DegenerateConfig("shift parameters must be finite");
  }
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  Xoshiro256 rng(cfg.seed);
  const std::size_t m = cfg.dim;
  const std::size_t num_source = cfg.n_common + cfg.n_source_private;
  const std::size_t per = cfg.samples_per_class;

  // Draw order is part of the reproducibility contract: source centers,
  // unknown centers, translation direction, then samples class by class.
  // With center_rank r < m, centers are unit vectors in the span of r random
  // orthonormal directions, drawn before anything else.
  const std::size_t rank = cfg.center_rank == 0 ? m : cfg.center_rank;
  Matrix span;
  if (rank < m) {
    span = Matrix(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(rank));
    for (std::size_t j = 0; j < rank; ++j) {
      Vector v = random_unit(rng, m);
      for (std::size_t i = 0; i < j; ++i) {
        v -= span.col(static_cast<Eigen::Index>(i)).dot(v) * span.col(static_cast<Eigen::Index>(i));
      }
      span.col(static_cast<Eigen::Index>(j)) = v.normalized();
    }
  }
  auto random_center = [&] {
    if (rank == m) return random_unit(rng, m);
    return Vector(span * random_unit(rng, rank));
  };

  std::vector<Vector> centers;
  centers.reserve(num_source + cfg.n_target_private);
  for (std::size_t c = 0; c < num_source; ++c) centers.push_back(random_center());

  const double min_gap = 3.0 * cfg.cluster_std;
  for (std::size_t u = 0; u < cfg.n_target_private; ++u) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxCenterAttempts && !placed; ++attempt) {
      Vector candidate = random_center();
      bool far = true;
      for (std::size_t c = 0; c < cfg.n_common && far; ++c) {
        far = (candidate - centers[c]).norm() >= min_gap;
      }
      if (far) {
        centers.push_back(std::move(candidate));
        placed = true;
      }
    }
    if (!placed) {
      throw DegenerateConfig("cannot place unknown center " + std::to_string(u) +
                             " at distance >= 3*cluster_std from the common centers");
    }
  }
  const Vector direction = random_unit(rng, m);

  auto draw = [&](const Vector& center) {
    Vector x = center;
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += cfg.cluster_std * rng.normal();
    return x;
  };

  Matrix source(static_cast<Eigen::Index>(num_source * per), static_cast<Eigen::Index>(m));
  std::vector<int> source_labels;
  source_labels.reserve(num_source * per);
  for (std::size_t c = 0; c < num_source; ++c) {
    for (std::size_t i = 0; i < per; ++i) {
      source.row(static_cast<Eigen::Index>(source_labels.size())) = draw(centers[c]).transpose();
      source_labels.push_back(static_cast<int>(c));
    }
  }

  const std::size_t n_target = (cfg.n_common + cfg.n_target_private) * per;
  Matrix target(static_cast<Eigen::Index>(n_target), static_cast<Eigen::Index>(m));
  ScenarioTruth truth;
  truth.num_classes = static_cast<int>(num_source);
  truth.target_true_labels.reserve(n_target);
  truth.target_unknown_mask.reserve(n_target);
  Eigen::Index row = 0;
  for (std::size_t c = 0; c < cfg.n_common; ++c) {
    for (std::size_t i = 0; i < per; ++i, ++row) {
      Vector x = draw(centers[c]);
      apply_shift(x, cfg.shift, direction);
      target.row(row) = x.transpose();
      truth.target_true_labels.push_back(static_cast<int>(c));
      truth.target_unknown_mask.push_back(false);
    }
  }
  for (std::size_t u = 0; u < cfg.n_target_private; ++u) {
    for (std::size_t i = 0; i < per; ++i, ++row) {
      target.row(row) = draw(centers[num_source + u]).transpose();
      truth.target_true_labels.push_back(truth.num_classes);
      truth.target_unknown_mask.push_back(true);
    }
  }

  Scenario scenario;
  scenario.source = make_feature_set(normalize_rows(source), std::move(source_labels));
  scenario.target = make_feature_set(normalize_rows(target));
  scenario.truth = std::move(truth);
  return scenario;
}

}  // namespace unida
