#pragma once

#include <filesystem>

#include "json.hpp"
#include "unida/config.hpp"
#include "unida/losses.hpp"
#include "unida/subspace.hpp"

namespace unida {

struct SavedModel {
  CosineClassifier classifier;
  SubspaceProjector projector;
  RunConfig config;
};

// JSON document: {"classifier": {"scale", "margin_alpha", "weights"},
// "projector": {"mean", "basis", "singular_values"}, "config": <echo>}.
// Matrices are arrays of rows. Throws IoError.
void save_model(const std::filesystem::path& path, const CosineClassifier& classifier,
                const SubspaceProjector& projector, const RunConfig& config);

// Throws IoError, FormatError for a structurally invalid document, or
// ConfigError for an invalid config echo.
SavedModel load_model(const std::filesystem::path& path);

}  // namespace unida
