#include "unida/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "unida/config.hpp"
#include "unida/dataset.hpp"
#include "unida/diagnostics.hpp"
#include "unida/error.hpp"
#include "unida/eval.hpp"
#include "unida/model_io.hpp"
#include "unida/trainer.hpp"

namespace unida {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

const fs::path& required(const std::optional<fs::path>& p, const char* key) {
  if (!p) throw ConfigError(std::string("config lacks paths.") + key);
  return *p;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<int> load_predictions_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "index,predicted_class") {
    throw FormatError(path.string() + ": expected header index,predicted_class");
  }
  std::map<std::size_t, int> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long index = -1;
    int pred = -1;
    char comma = 0;
    if (!(ss >> index >> comma >> pred) || comma != ',' || index < 0 || pred < 0 ||
        !(ss >> std::ws).eof()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
    }
    if (!rows.emplace(static_cast<std::size_t>(index), pred).second) {
      throw FormatError(path.string() + ": duplicate index " + std::to_string(index));
    }
  }
  std::vector<int> out;
  out.reserve(rows.size());
  for (const auto& [index, pred] : rows) {
    if (index != out.size()) {
      throw FormatError(path.string() + ": missing index " + std::to_string(out.size()));
    }
    out.push_back(pred);
  }
  return out;
}

nlohmann::ordered_json metrics_line(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["l_ugm"] = m.l_ugm;
  j["l_unk"] = m.l_unk;
  j["l_sup"] = m.l_sup;
  j["l_total"] = m.l_total;
  j["mu"] = m.mu;
  j["n_unknown_detected"] = m.n_unknown_detected;
  if (m.unknown_detection_acc) j["unknown_detection_acc"] = *m.unknown_detection_acc;
  if (m.h_score) j["h_score"] = *m.h_score;
  return j;
}

std::string fmt(double v) {
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  return ss.str();
}

}  // namespace

int cmd_synth(const fs::path& config_path, const std::optional<fs::path>& out_dir) {
  return guarded([&] {
    const RunConfig cfg = load_run_config(config_path);
    const fs::path dir = out_dir.value_or(cfg.out_dir);
    ensure_dir(dir);
    const Scenario sc = generate_scenario(cfg.scenario);
    write_features(dir / "source.udaf", sc.source, FeatureFormat::Binary);
    write_features(dir / "target.udaf", sc.target, FeatureFormat::Binary);
    write_truth_csv(dir / "truth.csv", sc.truth);
  });
}

int cmd_train(const fs::path& config_path, const std::optional<fs::path>& out_dir) {
  return guarded([&] {
    const RunConfig cfg = load_run_config(config_path);
    const fs::path dir = out_dir.value_or(cfg.out_dir);
    const FeatureSet source = load_features(required(cfg.paths.source, "source"));
    const FeatureSet target = load_features(required(cfg.paths.target, "target"));
    if (!source.has_labels()) throw MissingLabels("source features carry no labels");
    std::optional<ScenarioTruth> truth;
    if (cfg.paths.truth) truth = load_truth_csv(*cfg.paths.truth, source.num_classes());

    const TrainState state = run_training(normalized(source), normalized(target), cfg.train,
                                          truth ? &*truth : nullptr);
    ensure_dir(dir);
    save_model(dir / "model.json", state.classifier, state.projector, cfg);
    auto out = open_out(dir / "metrics.jsonl");
    for (const auto& m : state.log) out << metrics_line(m).dump() << '\n';
    if (!out) throw IoError("write failed for metrics.jsonl");
  });
}

int cmd_eval(const fs::path& model_path, const fs::path& target_path,
             const std::optional<fs::path>& truth_path, const fs::path& out_dir,
             std::ostream& out) {
  return guarded([&] {
    const SavedModel model = load_model(model_path);
    const FeatureSet target = normalized(load_features(target_path));
    if (target.dim() != model.classifier.dim()) {
      throw DimensionMismatch("target dim does not match the model");
    }
    const std::vector<int> predictions = predict_all(model.classifier, target.features);

    ensure_dir(out_dir);
    auto csv = open_out(out_dir / "predictions.csv");
    csv << "index,predicted_class\n";
    for (std::size_t i = 0; i < predictions.size(); ++i) csv << i << ',' << predictions[i] << '\n';
    if (!csv) throw IoError("write failed for predictions.csv");

    nlohmann::ordered_json report;
    if (truth_path) {
      const ScenarioTruth truth = load_truth_csv(*truth_path, model.classifier.num_classes());
      report = to_json(evaluate(predictions, truth));
    }
    const int unknown = model.classifier.num_classes();
    report["n_predictions"] = predictions.size();
    report["n_predicted_unknown"] =
        std::count(predictions.begin(), predictions.end(), unknown);
    out << report.dump(2) << '\n';
  });
}

int cmd_diagnose(const fs::path& model_path, const fs::path& source_path,
                 const fs::path& target_path, const fs::path& out_dir, SearchSpace space,
                 const std::optional<fs::path>& truth_path) {
  return guarded([&] {
    const SavedModel model = load_model(model_path);
    const FeatureSet source = normalized(load_features(source_path));
    const FeatureSet target = normalized(load_features(target_path));
    if (!source.has_labels()) throw MissingLabels("source features carry no labels");
    std::optional<ScenarioTruth> truth;
    if (truth_path) truth = load_truth_csv(*truth_path, source.num_classes());
    if (truth && truth->size() != target.size()) {
      throw LengthMismatch("truth and target differ in length");
    }

    const SubspaceProjector projector =
        space == SearchSpace::Subspace ? model.projector : identity_projector(source.dim());
    const TrainConfig& tc = model.config.train;
    const auto assessments = assess_targets(source, target.features, projector, tc);
    const Matrix probs = forward_probs(model.classifier, target.features);

    ensure_dir(out_dir);
    auto csv = open_out(out_dir / "assessments.csv");
    csv << "index,u,r_k,delta,lambda,lambda_hat,verdict,density,posterior";
    if (truth) csv << ",true_unknown";
    csv << '\n';
    const std::size_t m = projector.dim();
    for (std::size_t i = 0; i < assessments.size(); ++i) {
      const auto& a = assessments[i];
      csv << i << ',' << a.u << ',' << fmt(a.r_k) << ',' << fmt(a.delta) << ','
          << fmt(a.lambda_max) << ',' << fmt(a.lambda_hat) << ','
          << (a.verdict == Verdict::Known ? "known" : "unknown") << ',';
      // Density terms are undefined at zero radius or in one dimension.
      if (a.r_k > 1e-12 && m >= 2) {
        const auto k_max = static_cast<std::size_t>(a.u);
        csv << fmt(density_estimate(tc.k, k_max, a.r_k, m, model.config.diagnostics.c0)) << ','
            << to_string(unknown_posterior_indicator(a.r_k, k_max, tc.k, m,
                                                     model.config.diagnostics));
      } else {
        csv << ',';
      }
      if (truth) csv << ',' << (truth->target_unknown_mask[i] ? 1 : 0);
      csv << '\n';
    }
    if (!csv) throw IoError("write failed for assessments.csv");

    std::vector<bool> mask(assessments.size());
    for (std::size_t i = 0; i < mask.size(); ++i) {
      mask[i] = truth ? truth->target_unknown_mask[i] : assessments[i].verdict == Verdict::Unknown;
    }
    export_histograms(assessments, probs, mask, model.config.histogram_bins,
                      out_dir / "histograms.csv");
  });
}

int cmd_score(const fs::path& predictions_path, const fs::path& truth_path,
              std::optional<int> num_classes, std::ostream& out) {
  return guarded([&] {
    const std::vector<int> predictions = load_predictions_csv(predictions_path);
    const ScenarioTruth truth = load_truth_csv(truth_path, num_classes);
    const EvalReport report = evaluate(predictions, truth);
    nlohmann::ordered_json j;
    j["a_com"] = report.a_com;
    j["a_unk"] = report.a_unk;
    j["h_score"] = report.h;
    out << j.dump() << '\n';
  });
}

int run_cli(int argc, char** argv) {
  CLI::App app{"unida: unknown-aware domain adaptation on fixed embeddings"};
  app.require_subcommand(1);

  fs::path config;
  std::optional<fs::path> out;
  fs::path model;
  fs::path source;
  fs::path target;
  std::optional<fs::path> truth;
  fs::path predictions;
  std::optional<int> classes;
  std::string space = "subspace";

  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  synth->add_option("--config", config, "run config JSON")->required();
  synth->add_option("--out", out, "output directory (default: config out_dir)");

  auto* train = app.add_subcommand("train", "train the classifier");
  train->add_option("--config", config, "run config JSON")->required();
  train->add_option("--out", out, "output directory (default: config out_dir)");

  auto* eval = app.add_subcommand("eval", "predict and score target samples");
  eval->add_option("--model", model, "model.json")->required();
  eval->add_option("--target", target, "target features")->required();
  eval->add_option("--truth", truth, "truth CSV");
  eval->add_option("--out", out, "output directory (default: .)");

  auto* diagnose = app.add_subcommand("diagnose", "export per-sample assessments");
  diagnose->add_option("--model", model, "model.json")->required();
  diagnose->add_option("--source", source, "source features")->required();
  diagnose->add_option("--target", target, "target features")->required();
  diagnose->add_option("--truth", truth, "truth CSV");
  diagnose->add_option("--out", out, "output directory (default: .)");
  diagnose->add_option("--space", space, "neighbor search space")
      ->check(CLI::IsMember({"original", "subspace"}));

  auto* score = app.add_subcommand("score", "H-score of a predictions CSV");
  score->add_option("--predictions", predictions, "CSV with index,predicted_class")->required();
  score->add_option("--truth", truth, "truth CSV")->required();
  score->add_option("--classes", classes, "number of known classes C");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*synth) return cmd_synth(config, out);
  if (*train) return cmd_train(config, out);
  if (*eval) return cmd_eval(model, target, truth, out.value_or("."), std::cout);
  if (*diagnose) {
    return cmd_diagnose(model, source, target, out.value_or("."),
                        space == "original" ? SearchSpace::Original : SearchSpace::Subspace,
                        truth);
  }
  return cmd_score(predictions, *truth, classes, std::cout);
}

}  // namespace unida
