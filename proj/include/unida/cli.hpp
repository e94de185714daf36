#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace unida {

enum class SearchSpace { Original, Subspace };

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Each command reports failures on stderr and returns an exit code instead
// of throwing. `out_dir` overrides the config's out_dir where applicable.

// Writes source.udaf, target.udaf and truth.csv.
int cmd_synth(const std::filesystem::path& config_path,
              const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Writes model.json and metrics.jsonl.
int cmd_train(const std::filesystem::path& config_path,
              const std::optional<std::filesystem::path>& out_dir = std::nullopt);

// Prints the report JSON to `out` and writes predictions.csv.
int cmd_eval(const std::filesystem::path& model_path, const std::filesystem::path& target_path,
             const std::optional<std::filesystem::path>& truth_path,
             const std::filesystem::path& out_dir, std::ostream& out);

// Writes assessments.csv and histograms.csv.
int cmd_diagnose(const std::filesystem::path& model_path, const std::filesystem::path& source_path,
                 const std::filesystem::path& target_path, const std::filesystem::path& out_dir,
                 SearchSpace space,
                 const std::optional<std::filesystem::path>& truth_path = std::nullopt);

// Prints {"a_com", "a_unk", "h_score"} for a predictions CSV
// (index,predicted_class) against a truth CSV.
int cmd_score(const std::filesystem::path& predictions_path,
              const std::filesystem::path& truth_path, std::optional<int> num_classes,
              std::ostream& out);

// Argument parsing and dispatch for the `unida` executable.
int run_cli(int argc, char** argv);

}  // namespace unida
