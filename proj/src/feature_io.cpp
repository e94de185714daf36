#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "unida/dataset.hpp"
#include "unida/error.hpp"

namespace unida {

namespace {

constexpr std::array<char, 4> kMagic{'U', 'D', 'A', 'F'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                                  static_cast<char>((v >> 16) & 0xFF),
                                  static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(std::istream& in, const char* what) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw FormatError(std::string("truncated file while reading ") + what);
  }
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, std::size_t row) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError("bad number '" + s + "' in row " + std::to_string(row));
  }
  return v;
}

long parse_long(const std::string& s, std::size_t row) {
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw FormatError("bad integer '" + s + "' in row " + std::to_string(row));
  }
  return v;
}

FeatureSet load_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::array<char, 4> magic{};
  if (!in.read(magic.data(), 4) || magic != kMagic) {
    throw FormatError(path.string() + ": bad magic");
  }
  const std::uint32_t version = get_u32(in, "version");
  if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version));
  const std::uint32_t n = get_u32(in, "n");
  const std::uint32_t m = get_u32(in, "m");
  char flag = 0;
  if (!in.read(&flag, 1)) throw FormatError("truncated header");
  if (n == 0 || m == 0) throw FormatError("empty shape");
  if (flag != 0 && flag != 1) throw FormatError("has_labels must be 0 or 1");

  Matrix features(n, m);
  std::vector<unsigned char> buf(static_cast<std::size_t>(n) * m * 4);
  if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
    throw FormatError(path.string() + ": payload shorter than n*m floats");
  }
  for (std::size_t idx = 0; idx < static_cast<std::size_t>(n) * m; ++idx) {
    const unsigned char* p = &buf[idx * 4];
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    features.data()[idx] = static_cast<double>(std::bit_cast<float>(bits));
  }
  std::optional<std::vector<int>> labels;
  if (flag == 1) {
    labels.emplace(n);
    for (std::uint32_t i = 0; i < n; ++i) {
      (*labels)[i] = static_cast<std::int32_t>(get_u32(in, "labels"));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError(path.string() + ": trailing bytes after payload");
  }
  return make_feature_set(std::move(features), std::move(labels));
}

FeatureSet load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header");
  const auto header = split_csv_line(line);
  bool has_labels = !header.empty() && header.back() == "label";
  const std::size_t m = header.size() - (has_labels ? 1 : 0);
  if (m == 0) throw FormatError("no feature columns");
  for (std::size_t j = 0; j < m; ++j) {
    if (header[j] != "f" + std::to_string(j)) {
      throw FormatError("unexpected header column '" + header[j] + "'");
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw FormatError("row " + std::to_string(rows) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < m; ++j) values.push_back(parse_double(fields[j], rows));
    if (has_labels) labels.push_back(static_cast<int>(parse_long(fields[m], rows)));
    ++rows;
  }
  if (rows == 0) throw FormatError(path.string() + ": no data rows");
  Matrix features = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(rows),
                                             static_cast<Eigen::Index>(m));
  std::optional<std::vector<int>> lab;
  if (has_labels) lab = std::move(labels);
  return make_feature_set(std::move(features), std::move(lab));
}

}  // namespace

FeatureFormat format_for_path(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".csv" ? FeatureFormat::Csv : FeatureFormat::Binary;
}

FeatureSet load_features(const std::filesystem::path& path, FeatureFormat format) {
  return format == FeatureFormat::Csv ? load_csv(path) : load_binary(path);
}

FeatureSet load_features(const std::filesystem::path& path) {
  return load_features(path, format_for_path(path));
}

void write_features(const std::filesystem::path& path, const FeatureSet& set,
                    FeatureFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const auto n = set.features.rows();
  const auto m = set.features.cols();
  if (format == FeatureFormat::Binary) {
    out.write(kMagic.data(), 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(n));
    put_u32(out, static_cast<std::uint32_t>(m));
    const char flag = set.labels ? 1 : 0;
    out.write(&flag, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(set.features(i, j))));
      }
    }
    if (set.labels) {
      for (int label : *set.labels) put_u32(out, static_cast<std::uint32_t>(label));
    }
  } else {
    for (Eigen::Index j = 0; j < m; ++j) out << (j ? "," : "") << 'f' << j;
    if (set.labels) out << ",label";
    out << '\n';
    out.precision(17);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) out << (j ? "," : "") << set.features(i, j);
      if (set.labels) out << ',' << (*set.labels)[static_cast<std::size_t>(i)];
      out << '\n';
    }
  }
  if (!out) throw IoError("write failed for " + path.string());
}

void write_features(const std::filesystem::path& path, const FeatureSet& set) {
  write_features(path, set, format_for_path(path));
}

void write_truth_csv(const std::filesystem::path& path, const ScenarioTruth& truth) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "index,label,unknown\n";
  for (std::size_t i = 0; i < truth.size(); ++i) {
    out << i << ',' << truth.target_true_labels[i] << ',' << (truth.target_unknown_mask[i] ? 1 : 0)
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

ScenarioTruth load_truth_csv(const std::filesystem::path& path, std::optional<int> num_classes) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || split_csv_line(line) !=
                                     std::vector<std::string>{"index", "label", "unknown"}) {
    throw FormatError(path.string() + ": expected header index,label,unknown");
  }
  ScenarioTruth truth;
  std::optional<int> unknown_code;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) throw FormatError("truth row " + std::to_string(row) + " needs 3 fields");
    if (parse_long(f[0], row) != static_cast<long>(row)) {
      throw FormatError("truth rows must be indexed 0..n-1 in order");
    }
    const int label = static_cast<int>(parse_long(f[1], row));
    const long flag = parse_long(f[2], row);
    if (flag != 0 && flag != 1) throw FormatError("unknown flag must be 0 or 1");
    if (flag == 1) {
      if (unknown_code && *unknown_code != label) {
        throw FormatError("unknown rows disagree on the unknown label code");
      }
      unknown_code = label;
    }
    truth.target_true_labels.push_back(label);
    truth.target_unknown_mask.push_back(flag == 1);
    ++row;
  }
  if (num_classes) {
    if (unknown_code && *unknown_code != *num_classes) {
      throw FormatError("unknown rows are labeled " + std::to_string(*unknown_code) +
                        " but num_classes is " + std::to_string(*num_classes));
    }
    truth.num_classes = *num_classes;
  } else if (unknown_code) {
    truth.num_classes = *unknown_code;
  } else {
    throw FormatError(path.string() + ": no unknown rows; number of classes must be given");
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const int label = truth.target_true_labels[i];
    if (label < 0 || label > truth.num_classes ||
        (label == truth.num_classes) != static_cast<bool>(truth.target_unknown_mask[i])) {
      throw FormatError("truth row " + std::to_string(i) + " is inconsistent");
    }
  }
  return truth;
}

}  // namespace unida
