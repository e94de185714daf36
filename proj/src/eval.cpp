#include "unida/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "unida/error.hpp"

namespace unida {

double h_score(double a_com, double a_unk) {
  const double denom = a_com + a_unk;
  if (denom == 0.0) return 0.0;
  return 2.0 * a_com * a_unk / denom;
}

double prediction_entropy(const Vector& probs) {
  double h = 0.0;
  for (Eigen::Index j = 0; j < probs.size(); ++j) {
    const double p = probs(j);
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy_threshold(int num_classes) {
  return std::log(static_cast<double>(num_classes)) / 2.0;
}

int predict(const CosineClassifier& clf, const Vector& z) {
  const Vector probs = forward_probs(clf, z);
  if (prediction_entropy(probs) >= entropy_threshold(clf.num_classes())) {
    return clf.num_classes();
  }
  Eigen::Index arg = 0;
  probs.maxCoeff(&arg);
  return static_cast<int>(arg);
}

std::vector<int> predict_all(const CosineClassifier& clf, const Matrix& z) {
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    out[static_cast<std::size_t>(i)] = predict(clf, z.row(i).transpose());
  }
  return out;
}

EvalReport evaluate(std::span<const int> predictions, const ScenarioTruth& truth) {
  if (predictions.size() != truth.size()) {
    throw LengthMismatch(std::to_string(predictions.size()) + " predictions for " +
                         std::to_string(truth.size()) + " truth rows");
  }
  const int unknown = truth.num_classes;
  std::map<int, std::pair<std::size_t, std::size_t>> hits;  // class -> (correct, total)
  EvalReport report;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const int label = truth.target_true_labels[i];
    const int pred = predictions[i];
    ++report.confusion[label][pred];
    auto& [correct, total] = hits[label];
    ++total;
    if (pred == label) ++correct;
    if (label == unknown) {
      ++report.n_unknown;
    } else {
      ++report.n_common;
    }
  }
  double common_sum = 0.0;
  std::size_t common_classes = 0;
  for (const auto& [label, counts] : hits) {
    const double acc = static_cast<double>(counts.first) / static_cast<double>(counts.second);
    report.per_class_acc[label] = acc;
    if (label == unknown) {
      report.a_unk = acc;
    } else {
      common_sum += acc;
      ++common_classes;
    }
  }
  report.a_com = common_classes ? common_sum / static_cast<double>(common_classes) : 0.0;
  report.h = h_score(report.a_com, report.a_unk);
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["a_com"] = report.a_com;
  j["a_unk"] = report.a_unk;
  j["h_score"] = report.h;
  j["n_common"] = report.n_common;
  j["n_unknown"] = report.n_unknown;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [label, acc] : report.per_class_acc) per_class[std::to_string(label)] = acc;
  j["per_class_acc"] = per_class;
  nlohmann::ordered_json confusion = nlohmann::ordered_json::object();
  for (const auto& [label, row] : report.confusion) {
    nlohmann::ordered_json r = nlohmann::ordered_json::object();
    for (const auto& [pred, count] : row) r[std::to_string(pred)] = count;
    confusion[std::to_string(label)] = r;
  }
  j["confusion"] = confusion;
  return j;
}

double unknown_detection_accuracy(std::span<const UncertaintyAssessment> assessments,
                                  const std::vector<bool>& unknown_mask) {
  if (assessments.size() != unknown_mask.size()) {
    throw LengthMismatch("assessments and truth mask differ in length");
  }
  if (assessments.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < assessments.size(); ++i) {
    if ((assessments[i].verdict == Verdict::Unknown) == unknown_mask[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(assessments.size());
}

namespace {

void bin_quantity(const std::string& name, const std::vector<double>& values,
                  const std::vector<bool>& unknown_mask, std::size_t bins,
                  std::vector<HistogramRow>& out) {
  if (values.empty()) return;
  double lo = *std::min_element(values.begin(), values.end());
  double hi = *std::max_element(values.begin(), values.end());
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  const std::size_t first = out.size();
  for (std::size_t b = 0; b < bins; ++b) {
    const double low = lo + width * static_cast<double>(b);
    const double high = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    out.push_back(HistogramRow{name, low, high, 0, 0});
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto b = static_cast<std::size_t>(std::floor((values[i] - lo) / width));
    b = std::min(b, bins - 1);
    auto& row = out[first + b];
    if (unknown_mask[i]) {
      ++row.count_unknown;
    } else {
      ++row.count_known;
    }
  }
}

}  // namespace

std::vector<HistogramRow> build_histograms(std::span<const UncertaintyAssessment> assessments,
                                           const Matrix& probs,
                                           const std::vector<bool>& unknown_mask,
                                           std::size_t bins) {
  if (bins < 2) throw InvalidArgument("need at least 2 bins");
  const std::size_t n = assessments.size();
  if (unknown_mask.size() != n || static_cast<std::size_t>(probs.rows()) != n) {
    throw InvalidArgument("assessments, probabilities and mask must have equal length");
  }
  std::vector<double> r_k(n);
  std::vector<double> u(n);
  std::vector<double> entropy(n);
  for (std::size_t i = 0; i < n; ++i) {
    r_k[i] = assessments[i].r_k;
    u[i] = assessments[i].u;
    entropy[i] = prediction_entropy(probs.row(static_cast<Eigen::Index>(i)).transpose());
  }
  std::vector<HistogramRow> rows;
  bin_quantity("r_k", r_k, unknown_mask, bins, rows);
  bin_quantity("u", u, unknown_mask, bins, rows);
  bin_quantity("entropy", entropy, unknown_mask, bins, rows);
  return rows;
}

void export_histograms(std::span<const UncertaintyAssessment> assessments, const Matrix& probs,
                       const std::vector<bool>& unknown_mask, std::size_t bins,
                       const std::filesystem::path& path) {
  const auto rows = build_histograms(assessments, probs, unknown_mask, bins);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "quantity,bin_low,bin_high,count_known,count_unknown\n";
  for (const auto& r : rows) {
    out << r.quantity << ',' << r.bin_low << ',' << r.bin_high << ',' << r.count_known << ','
        << r.count_unknown << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace unida
