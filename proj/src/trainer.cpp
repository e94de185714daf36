#include "unida/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "unida/error.hpp"
#include "unida/eval.hpp"

namespace unida {

double TrainConfig::effective_tau() const { return tau.value_or(default_tau(k)); }

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(lr_backbone > 0.0, "lr_backbone must be positive");
  require(lr_classifier > 0.0, "lr_classifier must be positive");
  require(sgd_momentum >= 0.0 && sgd_momentum < 1.0, "sgd_momentum must be in [0, 1)");
  require(weight_decay >= 0.0, "weight_decay must be non-negative");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(epochs >= 1, "epochs must be >= 1");
  require(k >= 1, "k must be >= 1");
  require(!tau || *tau >= 0.0, "tau must be non-negative");
  require(lambda >= 0.0 && std::isfinite(lambda), "lambda must be non-negative");
  require(temperature > 0.0 && std::isfinite(temperature), "temperature must be positive");
  require(bank_alpha >= 0.0 && bank_alpha <= 1.0, "bank_alpha must be in [0, 1]");
  require(scale > 0.0 && std::isfinite(scale), "scale must be positive");
  require(margin_alpha >= 0.0 && std::isfinite(margin_alpha), "margin_alpha must be >= 0");
  require(refit_every >= 1, "refit_every must be >= 1");
  require(delta_ratio >= 0.0, "delta_ratio must be non-negative");
  require(lr_gamma >= 0.0 && lr_power >= 0.0, "lr decay parameters must be non-negative");
  if (const auto* e = std::get_if<EnergyFraction>(&projection)) {
    require(e->fraction > 0.0 && e->fraction <= 1.0, "energy fraction must be in (0, 1]");
  } else {
    require(std::get<FixedDim>(projection).dim >= 1, "subspace dim must be >= 1");
  }
}

TrainConfig ce_baseline_config(TrainConfig base) {
  base.use_margin = false;
  base.use_pseudo_labels = false;
  base.use_supcon = false;
  base.lambda = 0.0;
  return base;
}

double lr_schedule(std::size_t step, std::size_t max_steps, double lr0, double gamma,
                   double power) {
  if (max_steps == 0 || step > max_steps) {
    throw InvalidArgument("lr_schedule needs 0 <= step <= max_steps, max_steps > 0");
  }
  const double p = static_cast<double>(step) / static_cast<double>(max_steps);
  return lr0 * std::pow(1.0 + gamma * p, -power);
}

void sgd_step(Matrix& params, const Matrix& grads, Matrix& velocity, double lr, double momentum,
              double weight_decay) {
  if (grads.rows() != params.rows() || grads.cols() != params.cols() ||
      velocity.rows() != params.rows() || velocity.cols() != params.cols()) {
    throw DimensionMismatch("sgd_step: params, grads and velocity must share a shape");
  }
  const Matrix d = grads + weight_decay * params;
  velocity = momentum * velocity - lr * d;
  params += momentum * velocity - lr * d;
}

ShuffledStream::ShuffledStream(std::size_t n, std::uint64_t seed) : n_(n), rng_(seed) {
  if (n == 0) throw InvalidArgument("cannot stream from an empty set");
  order_.resize(n);
  reshuffle();
}

void ShuffledStream::reshuffle() {
  for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
  rng_.shuffle(order_);
  pos_ = 0;
}

std::vector<std::size_t> ShuffledStream::next(std::size_t count) {
  std::vector<std::size_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (pos_ == n_) reshuffle();
    out.push_back(order_[pos_++]);
  }
  return out;
}

SubspaceProjector fit_joint_projector(const Matrix& bank, const Matrix& target,
                                      const TrainConfig& cfg) {
  if (!cfg.use_subspace) return identity_projector(static_cast<std::size_t>(bank.cols()));
  Matrix joint(bank.rows() + target.rows(), bank.cols());
  joint.topRows(bank.rows()) = bank;
  joint.bottomRows(target.rows()) = target;
  return fit_projector(joint, cfg.projection);
}

namespace {

AssessOptions assess_options(const TrainConfig& cfg, int num_classes) {
  AssessOptions o;
  o.k = cfg.k;
  o.tau = cfg.effective_tau();
  o.num_classes = num_classes;
  o.use_delta_filter = cfg.use_delta_filter;
  o.delta_ratio = cfg.delta_ratio;
  return o;
}

Matrix gather_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  }
  return out;
}

void check_inputs(const FeatureSet& source, const FeatureSet& target) {
  if (!source.has_labels()) throw MissingLabels("source set must be labeled");
  if (source.dim() != target.dim()) {
    throw DimensionMismatch("source has dim " + std::to_string(source.dim()) + ", target " +
                            std::to_string(target.dim()));
  }
  if (target.size() == 0) throw TooFewSamples("target set is empty");
}

}  // namespace

std::vector<UncertaintyAssessment> assess_targets(const FeatureSet& source, const Matrix& target,
                                                  const SubspaceProjector& projector,
                                                  const TrainConfig& cfg) {
  check_inputs(source, FeatureSet{target, std::nullopt});
  const int num_classes = source.num_classes();
  const SourceSampler sampler(*source.labels, num_classes,
                              derive_seed(cfg.seed, streams::kSampler));
  return assess_batch(project(projector, target), project(projector, source.features),
                      *source.labels, assess_options(cfg, num_classes), sampler,
                      derive_seed(cfg.seed, streams::kAssess));
}

TrainState run_training(const FeatureSet& source, const FeatureSet& target,
                        const TrainConfig& cfg, const ScenarioTruth* truth,
                        const StepObserver& observer) {
  cfg.validate();
  check_inputs(source, target);
  if (truth && truth->size() != target.size()) {
    throw LengthMismatch("truth has " + std::to_string(truth->size()) + " rows for " +
                         std::to_string(target.size()) + " targets");
  }
  const int num_classes = source.num_classes();
  const auto n_target = target.size();
  const std::size_t steps_per_epoch = (n_target + cfg.batch_size - 1) / cfg.batch_size;
  const std::size_t max_steps = steps_per_epoch * cfg.epochs;

  TrainState state{
      CosineClassifier::random(num_classes, source.dim(), cfg.scale, cfg.margin_alpha,
                               derive_seed(cfg.seed, streams::kInit)),
      MemoryBank(source, cfg.bank_alpha),
      identity_projector(source.dim()),
      Matrix::Zero(num_classes, static_cast<Eigen::Index>(source.dim())),
      0,
      {}};
  const SourceSampler sampler(*source.labels, num_classes,
                              derive_seed(cfg.seed, streams::kSampler));
  const AssessOptions options = assess_options(cfg, num_classes);
  const auto& labels = state.bank.labels();
  ShuffledStream source_stream(source.size(), derive_seed(cfg.seed, streams::kSource));
  Xoshiro256 target_rng(derive_seed(cfg.seed, streams::kTarget));

  std::vector<std::size_t> target_order(n_target);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (!cfg.refit_per_batch && epoch % cfg.refit_every == 0) {
      state.projector = fit_joint_projector(state.bank.slots(), target.features, cfg);
    }
    for (std::size_t i = 0; i < n_target; ++i) target_order[i] = i;
    target_rng.shuffle(target_order);

    EpochMetrics metrics;
    metrics.epoch = epoch + 1;
    std::vector<UncertaintyAssessment> epoch_assessments(n_target);

    for (std::size_t s = 0; s < steps_per_epoch; ++s) {
      const std::size_t begin = s * cfg.batch_size;
      const std::size_t end = std::min(n_target, begin + cfg.batch_size);
      const std::span<const std::size_t> tgt_idx(target_order.data() + begin, end - begin);
      const std::vector<std::size_t> src_idx = source_stream.next(cfg.batch_size);

      for (std::size_t i : src_idx) {
        state.bank.update_slot(i, source.features.row(static_cast<Eigen::Index>(i)).transpose());
      }
      const Matrix tgt_batch = gather_rows(target.features, tgt_idx);
      if (cfg.refit_per_batch) {
        state.projector = fit_joint_projector(state.bank.slots(), tgt_batch, cfg);
      }
      const auto assessments =
          assess_batch(project(state.projector, tgt_batch),
                       project(state.projector, state.bank.slots()), labels, options, sampler,
                       derive_seed(cfg.seed, streams::kAssess, state.step), tgt_idx);

      std::vector<std::size_t> known_rows;
      std::vector<std::size_t> unknown_rows;
      for (std::size_t i = 0; i < assessments.size(); ++i) {
        epoch_assessments[tgt_idx[i]] = assessments[i];
        (assessments[i].verdict == Verdict::Known ? known_rows : unknown_rows).push_back(i);
      }
      metrics.n_unknown_detected += unknown_rows.size();

      const Matrix unknown_feats = gather_rows(tgt_batch, unknown_rows);
      const double mu =
          cfg.use_margin ? compute_margin_mu(forward_probs(state.classifier, unknown_feats)) : 0.0;

      // Source batch first, then pseudo-labeled target knowns.
      const std::size_t n_pseudo = cfg.use_pseudo_labels ? known_rows.size() : 0;
      Matrix labeled(static_cast<Eigen::Index>(src_idx.size() + n_pseudo), tgt_batch.cols());
      std::vector<int> labeled_y;
      labeled_y.reserve(src_idx.size() + n_pseudo);
      for (std::size_t i : src_idx) {
        labeled.row(static_cast<Eigen::Index>(labeled_y.size())) =
            source.features.row(static_cast<Eigen::Index>(i));
        labeled_y.push_back(labels[i]);
      }
      for (std::size_t j = 0; j < n_pseudo; ++j) {
        const std::size_t i = known_rows[j];
        labeled.row(static_cast<Eigen::Index>(labeled_y.size())) =
            tgt_batch.row(static_cast<Eigen::Index>(i));
        labeled_y.push_back(assessments[i].pseudo_label);
      }

      const LossGrad ugm = ugm_loss_and_grad(state.classifier, labeled, labeled_y, mu);
      const LossGrad unk = unknown_loss_and_grad(state.classifier, unknown_feats);
      LossGrad sup;
      if (cfg.use_supcon) {
        const Matrix anchors = gather_rows(source.features, src_idx);
        std::vector<int> anchor_y;
        anchor_y.reserve(src_idx.size());
        for (std::size_t i : src_idx) anchor_y.push_back(labels[i]);
        sup = supcon_loss_and_grad(anchors, anchor_y, state.bank.slots(), labels,
                                   cfg.temperature, src_idx);
      }
      const LossReport report = total_loss(ugm, unk, sup, cfg.lambda, mu);

      const double lr =
          lr_schedule(state.step, max_steps, cfg.lr_classifier, cfg.lr_gamma, cfg.lr_power);
      sgd_step(state.classifier.mutable_weights(), report.grad_weights, state.velocity, lr,
               cfg.sgd_momentum, cfg.weight_decay);
      state.classifier.renormalize();
      ++state.step;

      metrics.l_ugm += report.l_ugm;
      metrics.l_unk += report.l_unk;
      metrics.l_sup += report.l_sup;
      metrics.l_total += report.l_total;
      metrics.mu += report.mu;
      if (observer) observer(state);
    }

    const auto steps = static_cast<double>(steps_per_epoch);
    metrics.l_ugm /= steps;
    metrics.l_unk /= steps;
    metrics.l_sup /= steps;
    metrics.l_total /= steps;
    metrics.mu /= steps;
    if (truth) {
      metrics.unknown_detection_acc =
          unknown_detection_accuracy(epoch_assessments, truth->target_unknown_mask);
      const auto predictions = predict_all(state.classifier, target.features);
      metrics.h_score = evaluate(predictions, *truth).h;
    }
    state.log.push_back(metrics);
  }
  return state;
}

}  // namespace unida
