#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "unida/types.hpp"

namespace unida {

/// Linear classifier on the unit sphere: logit_j = s * <w_j / |w_j|, z>.
///
/// The raw weight rows are kept so gradients can be taken through the row
/// normalization; the trainer renormalizes after every update, so in
/// practice the rows stay unit-norm.
class CosineClassifier {
 public:
  // Throws InvalidArgument for a non-positive scale, negative margin_alpha,
  // or a weight row with norm below 1e-12.
  CosineClassifier(Matrix weights, double scale, double margin_alpha);

  // Gaussian rows, normalized.
  static CosineClassifier random(int num_classes, std::size_t dim, double scale,
                                 double margin_alpha, std::uint64_t seed);

  int num_classes() const { return static_cast<int>(weights_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(weights_.cols()); }
  double scale() const { return scale_; }
  double margin_alpha() const { return margin_alpha_; }

  const Matrix& weights() const { return weights_; }
  Matrix& mutable_weights() { return weights_; }
  Matrix normalized_weights() const;
  void renormalize();

  Vector logits(const Vector& z) const;
  Matrix logits(const Matrix& z) const;  // one row per sample

 private:
  Matrix weights_;
  double scale_;
  double margin_alpha_;
};

// Adds s * margin_alpha * mu to the logit of `cls`.
struct MarginTerm {
  int cls = 0;
  double mu = 0.0;
};

Vector forward_probs(const CosineClassifier& clf, const Vector& z,
                     std::optional<MarginTerm> margin = std::nullopt);
Matrix forward_probs(const CosineClassifier& clf, const Matrix& z);

// Mean over rows of max(0, max_j p_j - 1/2); 0 for an empty matrix.
double compute_margin_mu(const Matrix& unknown_probs);

struct LossGrad {
  double loss = 0.0;
  Matrix grad_weights;   // w.r.t. the raw weight rows; empty for losses without W
  Matrix grad_features;  // one row per input feature
};

// Softmax cross-entropy on the scaled cosine logits, mean over the batch.
LossGrad ce_loss_and_grad(const CosineClassifier& clf, const Matrix& features,
                          std::span<const int> labels);

// Cross-entropy with s * margin_alpha * mu added to the true-class logit.
LossGrad ugm_loss_and_grad(const CosineClassifier& clf, const Matrix& features,
                           std::span<const int> labels, double mu);

// -(1 / (2N)) sum_z sum_j log p_j(z) - log C over the N discovered unknowns;
// zero loss and gradients when N = 0.
LossGrad unknown_loss_and_grad(const CosineClassifier& clf, const Matrix& features);

/// Supervised contrastive loss of anchors against memory-bank entries:
///
///   mean_i  -(1/|P_i|) sum_{m in P_i} log( exp(<z_i,m>/t) / sum_{m' in A_i} exp(<z_i,m'>/t) )
///
/// where A_i is every bank row except the anchor's own slot (when
/// `anchor_slots` names one) and P_i the rows of A_i sharing the anchor's
/// label. Bank rows are constants; only anchor gradients are produced.
/// Throws NoPositives when some P_i is empty.
LossGrad supcon_loss_and_grad(const Matrix& anchors, std::span<const int> anchor_labels,
                              const Matrix& bank, std::span<const int> bank_labels,
                              double temperature,
                              std::span<const std::size_t> anchor_slots = {});

struct LossReport {
  double l_ugm = 0.0;
  double l_unk = 0.0;
  double l_sup = 0.0;
  double l_total = 0.0;
  double mu = 0.0;
  Matrix grad_weights;
  Matrix grad_labeled;
  Matrix grad_unknown;
  Matrix grad_anchor;
};

// l_total = l_ugm + lambda * l_unk + l_sup, gradients weighted the same way.
LossReport total_loss(const LossGrad& ugm, const LossGrad& unknown, const LossGrad& supcon,
                      double lambda, double mu = 0.0);

}  // namespace unida
