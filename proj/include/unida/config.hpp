#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>

#include "json.hpp"
#include "unida/dataset.hpp"
#include "unida/diagnostics.hpp"
#include "unida/trainer.hpp"

namespace unida {

struct RunPaths {
  std::optional<std::filesystem::path> source;
  std::optional<std::filesystem::path> target;
  std::optional<std::filesystem::path> truth;
};

/// Everything one command needs, read from a single JSON document:
///
///   { "scenario": {...}, "train": {...}, "diagnostics": {...},
///     "paths": {"source", "target", "truth"}, "out_dir", "histogram_bins" }
///
/// Every section and key is optional; missing values take their defaults.
/// Unknown keys and wrong types raise ConfigError. Relative paths are
/// resolved against the directory of the config file.
struct RunConfig {
  ScenarioConfig scenario;
  TrainConfig train;
  DiagnosticsConfig diagnostics;
  RunPaths paths;
  std::filesystem::path out_dir = ".";
  std::size_t histogram_bins = 20;
};

RunConfig parse_run_config(const nlohmann::json& doc,
                           const std::filesystem::path& base_dir = {});
// Throws ConfigError for a missing or malformed file.
RunConfig load_run_config(const std::filesystem::path& path);

// Full echo with every default spelled out; parses back to the same config.
nlohmann::ordered_json to_json(const RunConfig& cfg);
nlohmann::ordered_json to_json(const TrainConfig& cfg);

}  // namespace unida
