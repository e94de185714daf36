#include "unida/model_io.hpp"

#include <fstream>

#include "unida/error.hpp"

namespace unida {

namespace {

using ojson = nlohmann::ordered_json;

ojson matrix_to_json(const Matrix& m) {
  ojson rows = ojson::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ojson row = ojson::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

ojson vector_to_json(const Vector& v) {
  ojson out = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Matrix matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) {
    throw FormatError(std::string(what) + " must be a non-empty array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(std::string(what) + " rows differ in length");
    }
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) throw FormatError(std::string(what) + " holds a non-number");
      m(i, c) = v.get<double>();
    }
  }
  return m;
}

Vector vector_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " holds a non-number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

const nlohmann::json& field(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("model file lacks '") + key + "'");
  return *it;
}

}  // namespace

void save_model(const std::filesystem::path& path, const CosineClassifier& classifier,
                const SubspaceProjector& projector, const RunConfig& config) {
  ojson doc;
  doc["classifier"] = {{"scale", classifier.scale()},
                       {"margin_alpha", classifier.margin_alpha()},
                       {"weights", matrix_to_json(classifier.weights())}};
  doc["projector"] = {{"mean", vector_to_json(projector.mean)},
                      {"basis", matrix_to_json(projector.basis)},
                      {"singular_values", vector_to_json(projector.singular_values)}};
  doc["config"] = to_json(config);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

SavedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError("malformed model file " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw FormatError("model file must hold a JSON object");
  const auto& c = field(doc, "classifier");
  const auto& p = field(doc, "projector");
  if (!field(c, "scale").is_number() || !field(c, "margin_alpha").is_number()) {
    throw FormatError("classifier scale and margin_alpha must be numbers");
  }
  CosineClassifier clf(matrix_from_json(field(c, "weights"), "classifier.weights"),
                       c["scale"].get<double>(), c["margin_alpha"].get<double>());
  SubspaceProjector proj{vector_from_json(field(p, "mean"), "projector.mean"),
                         matrix_from_json(field(p, "basis"), "projector.basis"),
                         vector_from_json(field(p, "singular_values"), "projector.singular_values")};
  if (static_cast<std::size_t>(proj.mean.size()) != proj.input_dim() ||
      proj.input_dim() != clf.dim()) {
    throw FormatError("projector and classifier dimensions disagree");
  }
  return SavedModel{std::move(clf), std::move(proj), parse_run_config(field(doc, "config"))};
}

}  // namespace unida
