#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "unida/dataset.hpp"
#include "unida/losses.hpp"
#include "unida/membank.hpp"
#include "unida/rng.hpp"
#include "unida/subspace.hpp"
#include "unida/uncertainty.hpp"

namespace unida {

struct TrainConfig {
  double lr_backbone = 0.001;  // kept for config parity; no backbone is trained
  double lr_classifier = 0.01;
  double sgd_momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 36;
  std::size_t epochs = 10;
  std::size_t k = 10;
  std::optional<double> tau;  // ceil(k / 2) when unset
  double lambda = 0.1;
  double temperature = 0.05;
  double bank_alpha = 0.9;
  double scale = 16.0;
  double margin_alpha = 1.0;
  ProjectionPolicy projection = EnergyFraction{0.9};
  bool use_subspace = true;     // false: neighbors are searched in the input space
  std::size_t refit_every = 1;  // epochs
  bool refit_per_batch = false;
  bool use_delta_filter = true;
  double delta_ratio = 0.2;
  bool use_margin = true;         // false forces mu = 0
  bool use_pseudo_labels = true;  // add discovered knowns to the margin loss
  bool use_supcon = true;
  double lr_gamma = 10.0;
  double lr_power = 0.75;
  std::uint64_t seed = 0;

  double effective_tau() const;
  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Source-only cross-entropy: no margin, no pseudo-labels, no unknown or
// contrastive terms. Everything else is copied from `base`.
TrainConfig ce_baseline_config(TrainConfig base);

// lr0 * (1 + gamma * step / max_steps)^(-power). Throws InvalidArgument
// unless 0 <= step <= max_steps and max_steps > 0.
double lr_schedule(std::size_t step, std::size_t max_steps, double lr0, double gamma = 10.0,
                   double power = 0.75);

// Nesterov momentum with L2 weight decay, in place:
//   d = g + wd * w;  v = momentum * v - lr * d;  w = w + momentum * v - lr * d
// Renormalization is left to the caller. Throws DimensionMismatch.
void sgd_step(Matrix& params, const Matrix& grads, Matrix& velocity, double lr, double momentum,
              double weight_decay);

/// Endless stream of indices in [0, n): each pass is a fresh shuffle.
class ShuffledStream {
 public:
  ShuffledStream(std::size_t n, std::uint64_t seed);
  std::vector<std::size_t> next(std::size_t count);

 private:
  void reshuffle();
  std::size_t n_;
  Xoshiro256 rng_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
};

// Streams the trainer derives from cfg.seed.
namespace streams {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kSource = 2;
inline constexpr std::uint64_t kTarget = 3;
inline constexpr std::uint64_t kSampler = 4;
inline constexpr std::uint64_t kAssess = 5;
}  // namespace streams

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double l_ugm = 0.0;     // step means
  double l_unk = 0.0;
  double l_sup = 0.0;
  double l_total = 0.0;
  double mu = 0.0;
  std::size_t n_unknown_detected = 0;
  std::optional<double> unknown_detection_acc;
  std::optional<double> h_score;
};

struct TrainState {
  CosineClassifier classifier;
  MemoryBank bank;
  SubspaceProjector projector;
  Matrix velocity;
  std::size_t step = 0;
  std::vector<EpochMetrics> log;
};

// Called after every SGD step with the updated state.
using StepObserver = std::function<void(const TrainState&)>;

/// Runs the full adaptation loop for cfg.epochs passes over the target set.
///
/// Each step draws a source batch and the next slice of the epoch's target
/// permutation, refreshes the bank slots of the source batch, assesses the
/// target batch in the current subspace, assembles the losses and takes one
/// SGD step on the classifier. With `truth`, each epoch's metrics include
/// unknown-detection accuracy and the H-score of the classifier.
TrainState run_training(const FeatureSet& source, const FeatureSet& target,
                        const TrainConfig& cfg, const ScenarioTruth* truth = nullptr,
                        const StepObserver& observer = {});

// Projector fitted on the bank slots stacked over the target rows, or the
// identity when use_subspace is false.
SubspaceProjector fit_joint_projector(const Matrix& bank, const Matrix& target,
                                      const TrainConfig& cfg);

// One-shot assessment of every target against the given source features.
std::vector<UncertaintyAssessment> assess_targets(const FeatureSet& source, const Matrix& target,
                                                  const SubspaceProjector& projector,
                                                  const TrainConfig& cfg);

}  // namespace unida
