#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "unida/dataset.hpp"
#include "unida/losses.hpp"
#include "unida/uncertainty.hpp"

namespace unida {

// Harmonic mean 2ab / (a + b); 0 when a + b = 0.
double h_score(double a_com, double a_unk);

// Shannon entropy in nats.
double prediction_entropy(const Vector& probs);

// log(C) / 2
double entropy_threshold(int num_classes);

// Argmax class, or C (unknown) when the entropy of the margin-free
// prediction is >= log(C) / 2.
int predict(const CosineClassifier& clf, const Vector& z);
std::vector<int> predict_all(const CosineClassifier& clf, const Matrix& z);

struct EvalReport {
  double a_com = 0.0;  // macro average over common classes present in the truth
  double a_unk = 0.0;  // fraction of true unknowns predicted as C
  double h = 0.0;
  std::map<int, double> per_class_acc;  // common classes, plus C for unknowns
  std::map<int, std::map<int, std::size_t>> confusion;  // truth -> prediction -> count
  std::size_t n_common = 0;
  std::size_t n_unknown = 0;
};

// Throws LengthMismatch when the prediction count differs from the truth.
// An empty group (no common or no unknown samples) scores 0.
EvalReport evaluate(std::span<const int> predictions, const ScenarioTruth& truth);

nlohmann::ordered_json to_json(const EvalReport& report);

// Fraction of samples whose verdict matches the truth mask.
double unknown_detection_accuracy(std::span<const UncertaintyAssessment> assessments,
                                  const std::vector<bool>& unknown_mask);

struct HistogramRow {
  std::string quantity;  // "r_k", "u" or "entropy"
  double bin_low = 0.0;
  double bin_high = 0.0;
  std::size_t count_known = 0;
  std::size_t count_unknown = 0;
};

// Equal-width bins spanning each quantity's observed range; samples are split
// by `unknown_mask`. Throws InvalidArgument for bins < 2 or length mismatch.
std::vector<HistogramRow> build_histograms(std::span<const UncertaintyAssessment> assessments,
                                           const Matrix& probs,
                                           const std::vector<bool>& unknown_mask,
                                           std::size_t bins);

// CSV: quantity,bin_low,bin_high,count_known,count_unknown. Throws IoError.
void export_histograms(std::span<const UncertaintyAssessment> assessments, const Matrix& probs,
                       const std::vector<bool>& unknown_mask, std::size_t bins,
                       const std::filesystem::path& path);

}  // namespace unida
