#include "unida/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "unida/error.hpp"
#include "unida/rng.hpp"

namespace unida {

namespace {

double log_sum_exp(const Vector& v) {
  const double top = v.maxCoeff();
  return top + std::log((v.array() - top).exp().sum());
}

Vector softmax(const Vector& logits) {
  Vector p = (logits.array() - logits.maxCoeff()).exp();
  return p / p.sum();
}

void check_features(const CosineClassifier& clf, const Matrix& features) {
  if (features.rows() > 0 && static_cast<std::size_t>(features.cols()) != clf.dim()) {
    throw DimensionMismatch("features have " + std::to_string(features.cols()) +
                            " columns, classifier expects " + std::to_string(clf.dim()));
  }
}

// Chain rule through w_j -> w_j / |w_j| for a gradient taken w.r.t. the
// normalized rows.
Matrix through_row_normalization(const Matrix& raw, const Matrix& grad_normalized) {
  Matrix out(raw.rows(), raw.cols());
  for (Eigen::Index j = 0; j < raw.rows(); ++j) {
    const double norm = raw.row(j).norm();
    const Eigen::RowVectorXd unit = raw.row(j) / norm;
    const double radial = unit.dot(grad_normalized.row(j));
    out.row(j) = (grad_normalized.row(j) - radial * unit) / norm;
  }
  return out;
}

// Shared path of the cross-entropy style losses; `true_logit_bonus` is added
// to the labeled class before the softmax.
LossGrad softmax_cross_entropy(const CosineClassifier& clf, const Matrix& features,
                               std::span<const int> labels, double true_logit_bonus) {
  check_features(clf, features);
  if (labels.size() != static_cast<std::size_t>(features.rows())) {
    throw LengthMismatch("one label per feature row is required");
  }
  const Matrix w_hat = clf.normalized_weights();
  const double s = clf.scale();
  const Eigen::Index n = features.rows();
  const int num_classes = clf.num_classes();

  LossGrad out;
  Matrix grad_w_hat = Matrix::Zero(w_hat.rows(), w_hat.cols());
  out.grad_features = Matrix::Zero(n, features.cols());
  if (n == 0) {
    out.grad_weights = grad_w_hat;
    return out;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) {
      throw InvalidArgument("label " + std::to_string(y) + " outside [0, " +
                            std::to_string(num_classes) + ")");
    }
    const Vector z = features.row(i).transpose();
    Vector logits = s * (w_hat * z);
    logits(y) += true_logit_bonus;
    const double lse = log_sum_exp(logits);
    out.loss += (lse - logits(y)) * inv_n;

    Vector dlogits = (logits.array() - lse).exp().matrix();
    dlogits(y) -= 1.0;
    dlogits *= inv_n;
    grad_w_hat.noalias() += s * dlogits * z.transpose();
    out.grad_features.row(i) = s * (w_hat.transpose() * dlogits).transpose();
  }
  out.grad_weights = through_row_normalization(clf.weights(), grad_w_hat);
  return out;
}

}  // namespace

CosineClassifier::CosineClassifier(Matrix weights, double scale, double margin_alpha)
    : weights_(std::move(weights)), scale_(scale), margin_alpha_(margin_alpha) {
  if (!(scale_ > 0.0) || !std::isfinite(scale_)) throw InvalidArgument("scale must be positive");
  if (!(margin_alpha_ >= 0.0) || !std::isfinite(margin_alpha_)) {
    throw InvalidArgument("margin_alpha must be non-negative");
  }
  if (weights_.rows() < 1 || weights_.cols() < 1) throw InvalidArgument("empty weight matrix");
  for (Eigen::Index j = 0; j < weights_.rows(); ++j) {
    if (!weights_.row(j).allFinite() || !(weights_.row(j).norm() >= 1e-12)) {
      throw InvalidArgument("weight row " + std::to_string(j) + " is zero or non-finite");
    }
  }
}

CosineClassifier CosineClassifier::random(int num_classes, std::size_t dim, double scale,
                                          double margin_alpha, std::uint64_t seed) {
  if (num_classes < 1 || dim < 1) throw InvalidArgument("classifier needs C >= 1 and d >= 1");
  Xoshiro256 rng(seed);
  Matrix w(num_classes, static_cast<Eigen::Index>(dim));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.normal();
  CosineClassifier clf(std::move(w), scale, margin_alpha);
  clf.renormalize();
  return clf;
}

Matrix CosineClassifier::normalized_weights() const {
  return weights_.rowwise().normalized();
}

void CosineClassifier::renormalize() { weights_.rowwise().normalize(); }

Vector CosineClassifier::logits(const Vector& z) const {
  return scale_ * (normalized_weights() * z);
}

Matrix CosineClassifier::logits(const Matrix& z) const {
  return scale_ * (z * normalized_weights().transpose());
}

Vector forward_probs(const CosineClassifier& clf, const Vector& z,
                     std::optional<MarginTerm> margin) {
  if (static_cast<std::size_t>(z.size()) != clf.dim()) {
    throw DimensionMismatch("feature width differs from classifier");
  }
  Vector logits = clf.logits(z);
  if (margin) {
    if (margin->cls < 0 || margin->cls >= clf.num_classes()) {
      throw InvalidArgument("margin class out of range");
    }
    logits(margin->cls) += clf.scale() * clf.margin_alpha() * margin->mu;
  }
  return softmax(logits);
}

Matrix forward_probs(const CosineClassifier& clf, const Matrix& z) {
  check_features(clf, z);
  Matrix logits = clf.logits(z);
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    probs.row(i) = softmax(logits.row(i).transpose()).transpose();
  }
  return probs;
}

double compute_margin_mu(const Matrix& unknown_probs) {
  if (unknown_probs.rows() == 0) return 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < unknown_probs.rows(); ++i) {
    sum += std::max(0.0, unknown_probs.row(i).maxCoeff() - 0.5);
  }
  return sum / static_cast<double>(unknown_probs.rows());
}

LossGrad ce_loss_and_grad(const CosineClassifier& clf, const Matrix& features,
                          std::span<const int> labels) {
  return softmax_cross_entropy(clf, features, labels, 0.0);
}

LossGrad ugm_loss_and_grad(const CosineClassifier& clf, const Matrix& features,
                           std::span<const int> labels, double mu) {
  return softmax_cross_entropy(clf, features, labels, clf.scale() * clf.margin_alpha() * mu);
}

LossGrad unknown_loss_and_grad(const CosineClassifier& clf, const Matrix& features) {
  check_features(clf, features);
  const Matrix w_hat = clf.normalized_weights();
  const double s = clf.scale();
  const Eigen::Index n = features.rows();
  const double c = static_cast<double>(clf.num_classes());

  LossGrad out;
  Matrix grad_w_hat = Matrix::Zero(w_hat.rows(), w_hat.cols());
  out.grad_features = Matrix::Zero(n, features.cols());
  if (n == 0) {
    out.grad_weights = grad_w_hat;
    return out;
  }
  const double coef = 1.0 / (2.0 * static_cast<double>(n));
  double sum_log_p = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector z = features.row(i).transpose();
    const Vector logits = s * (w_hat * z);
    const double lse = log_sum_exp(logits);
    sum_log_p += logits.sum() - c * lse;
    // d(-sum_j log p_j)/d logit_k = C p_k - 1
    Vector dlogits = (c * (logits.array() - lse).exp() - 1.0).matrix() * coef;
    grad_w_hat.noalias() += s * dlogits * z.transpose();
    out.grad_features.row(i) = s * (w_hat.transpose() * dlogits).transpose();
  }
  out.loss = -coef * sum_log_p - std::log(c);
  out.grad_weights = through_row_normalization(clf.weights(), grad_w_hat);
  return out;
}

LossGrad supcon_loss_and_grad(const Matrix& anchors, std::span<const int> anchor_labels,
                              const Matrix& bank, std::span<const int> bank_labels,
                              double temperature, std::span<const std::size_t> anchor_slots) {
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (anchor_labels.size() != static_cast<std::size_t>(anchors.rows())) {
    throw LengthMismatch("one label per anchor is required");
  }
  if (bank_labels.size() != static_cast<std::size_t>(bank.rows())) {
    throw LengthMismatch("one label per bank row is required");
  }
  if (!anchor_slots.empty() && anchor_slots.size() != anchor_labels.size()) {
    throw LengthMismatch("anchor_slots must name one slot per anchor");
  }
  if (anchors.rows() > 0 && anchors.cols() != bank.cols()) {
    throw DimensionMismatch("anchors and bank differ in width");
  }
  LossGrad out;
  out.grad_features = Matrix::Zero(anchors.rows(), anchors.cols());
  const Eigen::Index b = anchors.rows();
  if (b == 0) return out;

  const double inv_t = 1.0 / temperature;
  const double inv_b = 1.0 / static_cast<double>(b);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto own = anchor_slots.empty()
                         ? static_cast<Eigen::Index>(-1)
                         : static_cast<Eigen::Index>(anchor_slots[static_cast<std::size_t>(i)]);
    const int label = anchor_labels[static_cast<std::size_t>(i)];
    const Vector z = anchors.row(i).transpose();
    const Vector sims = (bank * z) * inv_t;

    double top = -std::numeric_limits<double>::infinity();
    Eigen::Index positives = 0;
    for (Eigen::Index j = 0; j < bank.rows(); ++j) {
      if (j == own) continue;
      top = std::max(top, sims(j));
      if (bank_labels[static_cast<std::size_t>(j)] == label) ++positives;
    }
    if (positives == 0) throw NoPositives("anchor " + std::to_string(i) + " has no positive");

    double denom = 0.0;
    double pos_sim_sum = 0.0;
    Vector weighted = Vector::Zero(z.size());
    Vector pos_mean = Vector::Zero(z.size());
    for (Eigen::Index j = 0; j < bank.rows(); ++j) {
      if (j == own) continue;
      const double e = std::exp(sims(j) - top);
      denom += e;
      weighted.noalias() += e * bank.row(j).transpose();
      if (bank_labels[static_cast<std::size_t>(j)] == label) {
        pos_sim_sum += sims(j);
        pos_mean.noalias() += bank.row(j).transpose();
      }
    }
    const double inv_pos = 1.0 / static_cast<double>(positives);
    out.loss += (top + std::log(denom) - pos_sim_sum * inv_pos) * inv_b;
    out.grad_features.row(i) =
        (inv_t * inv_b) * (weighted / denom - pos_mean * inv_pos).transpose();
  }
  return out;
}

LossReport total_loss(const LossGrad& ugm, const LossGrad& unknown, const LossGrad& supcon,
                      double lambda, double mu) {
  if (!(lambda >= 0.0)) throw InvalidArgument("lambda must be non-negative");
  LossReport r;
  r.l_ugm = ugm.loss;
  r.l_unk = unknown.loss;
  r.l_sup = supcon.loss;
  r.l_total = ugm.loss + lambda * unknown.loss + supcon.loss;
  r.mu = mu;

  auto accumulate = [&](const Matrix& g, double weight) {
    if (g.size() == 0) return;
    if (r.grad_weights.size() == 0) {
      r.grad_weights = weight * g;
    } else {
      if (g.rows() != r.grad_weights.rows() || g.cols() != r.grad_weights.cols()) {
        throw DimensionMismatch("weight gradients differ in shape");
      }
      r.grad_weights += weight * g;
    }
  };
  accumulate(ugm.grad_weights, 1.0);
  accumulate(unknown.grad_weights, lambda);
  accumulate(supcon.grad_weights, 1.0);
  r.grad_labeled = ugm.grad_features;
  r.grad_unknown = lambda * unknown.grad_features;
  r.grad_anchor = supcon.grad_features;
  return r;
}

}  // namespace unida
