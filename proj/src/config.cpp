#include "unida/config.hpp"

#include <fstream>
#include <set>
#include <string>
#include <type_traits>

#include "unida/error.hpp"

namespace unida {

namespace {

using nlohmann::json;

class Section {
 public:
  Section(const json& node, std::string name) : node_(node), name_(std::move(name)) {
    if (!node_.is_object()) throw ConfigError("'" + name_ + "' must be an object");
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = node_.find(key);
    if (it == node_.end()) return;
    bool ok = false;
    if constexpr (std::is_same_v<T, bool>) {
      ok = it->is_boolean();
    } else if constexpr (std::is_unsigned_v<T>) {
      ok = it->is_number_unsigned();
    } else if constexpr (std::is_floating_point_v<T>) {
      ok = it->is_number();
    } else {
      ok = it->is_string();
    }
    if (!ok) throw ConfigError("'" + name_ + "." + key + "' has the wrong type");
    out = it->get<T>();
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, _] : node_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + name_ + "." + key + "'");
    }
  }

 private:
  const json& node_;
  std::string name_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

void parse_scenario(const json& node, ScenarioConfig& cfg) {
  Section s(node, "scenario");
  s.read("n_common", cfg.n_common);
  s.read("n_source_private", cfg.n_source_private);
  s.read("n_target_private", cfg.n_target_private);
  s.read("samples_per_class", cfg.samples_per_class);
  s.read("dim", cfg.dim);
  s.read("cluster_std", cfg.cluster_std);
  s.read("center_rank", cfg.center_rank);
  s.read("seed", cfg.seed);
  if (const json* shift = s.child("shift")) {
    Section sh(*shift, "scenario.shift");
    sh.read("rotation_angle", cfg.shift.rotation_angle);
    sh.read("translation_magnitude", cfg.shift.translation_magnitude);
    sh.read("scale", cfg.shift.scale);
    sh.finish();
  }
  s.finish();
}

void parse_train(const json& node, TrainConfig& cfg) {
  Section s(node, "train");
  s.read("lr_backbone", cfg.lr_backbone);
  s.read("lr_classifier", cfg.lr_classifier);
  s.read("sgd_momentum", cfg.sgd_momentum);
  s.read("weight_decay", cfg.weight_decay);
  s.read("batch_size", cfg.batch_size);
  s.read("epochs", cfg.epochs);
  s.read("k", cfg.k);
  if (const json* tau = s.child("tau")) {
    if (tau->is_null()) {
      cfg.tau.reset();
    } else if (tau->is_number()) {
      cfg.tau = tau->get<double>();
    } else {
      throw ConfigError("'train.tau' must be a number or null");
    }
  }
  s.read("lambda", cfg.lambda);
  s.read("temperature", cfg.temperature);
  s.read("bank_alpha", cfg.bank_alpha);
  s.read("scale", cfg.scale);
  s.read("margin_alpha", cfg.margin_alpha);
  if (const json* proj = s.child("projection")) {
    Section p(*proj, "train.projection");
    std::string policy = "energy";
    double fraction = 0.9;
    std::size_t dim = 1;
    p.read("policy", policy);
    p.read("fraction", fraction);
    p.read("dim", dim);
    p.finish();
    if (policy == "energy") {
      cfg.projection = EnergyFraction{fraction};
    } else if (policy == "fixed") {
      cfg.projection = FixedDim{dim};
    } else {
      throw ConfigError("'train.projection.policy' must be \"energy\" or \"fixed\"");
    }
  }
  s.read("use_subspace", cfg.use_subspace);
  s.read("refit_every", cfg.refit_every);
  s.read("refit_per_batch", cfg.refit_per_batch);
  s.read("use_delta_filter", cfg.use_delta_filter);
  s.read("delta_ratio", cfg.delta_ratio);
  s.read("use_margin", cfg.use_margin);
  s.read("use_pseudo_labels", cfg.use_pseudo_labels);
  s.read("use_supcon", cfg.use_supcon);
  s.read("lr_gamma", cfg.lr_gamma);
  s.read("lr_power", cfg.lr_power);
  s.read("seed", cfg.seed);
  s.finish();
}

void parse_diagnostics(const json& node, DiagnosticsConfig& cfg) {
  Section s(node, "diagnostics");
  s.read("c0", cfg.c0);
  s.read("c1", cfg.c1);
  s.read("epsilon", cfg.epsilon);
  s.read("beta", cfg.beta);
  s.read("gamma", cfg.gamma);
  s.finish();
}

}  // namespace

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  Section root(doc, "config");
  if (const json* n = root.child("scenario")) parse_scenario(*n, cfg.scenario);
  if (const json* n = root.child("train")) parse_train(*n, cfg.train);
  if (const json* n = root.child("diagnostics")) parse_diagnostics(*n, cfg.diagnostics);
  if (const json* n = root.child("paths")) {
    Section p(*n, "paths");
    for (auto [key, slot] : {std::pair{"source", &cfg.paths.source},
                             std::pair{"target", &cfg.paths.target},
                             std::pair{"truth", &cfg.paths.truth}}) {
      if (const json* v = p.child(key)) {
        if (v->is_null()) continue;
        if (!v->is_string()) throw ConfigError(std::string("'paths.") + key + "' must be a string");
        *slot = resolve(v->get<std::string>(), base_dir);
      }
    }
    p.finish();
  }
  std::string out_dir;
  root.read("out_dir", out_dir);
  if (!out_dir.empty()) cfg.out_dir = resolve(out_dir, base_dir);
  else if (!base_dir.empty()) cfg.out_dir = base_dir;
  root.read("histogram_bins", cfg.histogram_bins);
  root.finish();

  try {
    cfg.scenario.validate();
  } catch (const DegenerateConfig& e) {
    throw ConfigError(e.what());
  }
  cfg.train.validate();
  cfg.diagnostics.validate();
  if (cfg.histogram_bins < 2) throw ConfigError("histogram_bins must be >= 2");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_run_config(doc, path.parent_path());
}

nlohmann::ordered_json to_json(const TrainConfig& t) {
  nlohmann::ordered_json j;
  j["lr_backbone"] = t.lr_backbone;
  j["lr_classifier"] = t.lr_classifier;
  j["sgd_momentum"] = t.sgd_momentum;
  j["weight_decay"] = t.weight_decay;
  j["batch_size"] = t.batch_size;
  j["epochs"] = t.epochs;
  j["k"] = t.k;
  j["tau"] = t.tau ? nlohmann::ordered_json(*t.tau) : nlohmann::ordered_json(nullptr);
  j["lambda"] = t.lambda;
  j["temperature"] = t.temperature;
  j["bank_alpha"] = t.bank_alpha;
  j["scale"] = t.scale;
  j["margin_alpha"] = t.margin_alpha;
  if (const auto* e = std::get_if<EnergyFraction>(&t.projection)) {
    j["projection"] = {{"policy", "energy"}, {"fraction", e->fraction}};
  } else {
    j["projection"] = {{"policy", "fixed"}, {"dim", std::get<FixedDim>(t.projection).dim}};
  }
  j["use_subspace"] = t.use_subspace;
  j["refit_every"] = t.refit_every;
  j["refit_per_batch"] = t.refit_per_batch;
  j["use_delta_filter"] = t.use_delta_filter;
  j["delta_ratio"] = t.delta_ratio;
  j["use_margin"] = t.use_margin;
  j["use_pseudo_labels"] = t.use_pseudo_labels;
  j["use_supcon"] = t.use_supcon;
  j["lr_gamma"] = t.lr_gamma;
  j["lr_power"] = t.lr_power;
  j["seed"] = t.seed;
  return j;
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  const auto& s = cfg.scenario;
  j["scenario"] = {{"n_common", s.n_common},
                   {"n_source_private", s.n_source_private},
                   {"n_target_private", s.n_target_private},
                   {"samples_per_class", s.samples_per_class},
                   {"dim", s.dim},
                   {"cluster_std", s.cluster_std},
                   {"center_rank", s.center_rank},
                   {"seed", s.seed},
                   {"shift",
                    {{"rotation_angle", s.shift.rotation_angle},
                     {"translation_magnitude", s.shift.translation_magnitude},
                     {"scale", s.shift.scale}}}};
  j["train"] = to_json(cfg.train);
  const auto& d = cfg.diagnostics;
  j["diagnostics"] = {
      {"c0", d.c0}, {"c1", d.c1}, {"epsilon", d.epsilon}, {"beta", d.beta}, {"gamma", d.gamma}};
  nlohmann::ordered_json paths = nlohmann::ordered_json::object();
  auto put = [&](const char* key, const std::optional<std::filesystem::path>& p) {
    paths[key] = p ? nlohmann::ordered_json(p->string()) : nlohmann::ordered_json(nullptr);
  };
  put("source", cfg.paths.source);
  put("target", cfg.paths.target);
  put("truth", cfg.paths.truth);
  j["paths"] = paths;
  j["out_dir"] = cfg.out_dir.string();
  j["histogram_bins"] = cfg.histogram_bins;
  return j;
}

}  // namespace unida
