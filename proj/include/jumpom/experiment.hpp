#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "jumpom/models.hpp"

namespace jumpom {

/// Experiment kinds accepted in the "experiment.type" field and as CLI subcommands.
const std::vector<std::string>& experiment_types();

/// A parsed experiment document (JSON). Relative file references resolve
/// against `base_dir`, the directory of the config file.
struct ExperimentConfig {
  nlohmann::json document;
  std::filesystem::path base_dir;
  std::string type;
  std::uint64_t seed = 0;
  int threads = 0;
  std::filesystem::path output;

  static ExperimentConfig parse(const nlohmann::json& doc, const std::filesystem::path& base_dir);
  /// Loads a config file, or the config embedded in a run manifest.
  static ExperimentConfig load(const std::filesystem::path& file);

  const nlohmann::json& model() const;
  const nlohmann::json& experiment() const;
  /// The "numerics" block, or an empty object.
  nlohmann::json numerics() const;
};

FiniteActivityModel finite_model_from_json(const nlohmann::json& j);
/// Accepts kind "infinite" (expressions) and kind "embedded" (a finite model
/// block, embedded with F = z).
InfiniteActivityModel infinite_model_from_json(const nlohmann::json& j);

struct RunRequest {
  std::string subcommand;  // one of experiment_types(), or "run" to take the type from the config
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out;
  std::optional<int> threads;
};

namespace exit_code {
constexpr int success = 0;
constexpr int internal = 1;
constexpr int validation = 2;  // bad input, bad config, or a model that fails validation
constexpr int numerical = 3;
}  // namespace exit_code

struct RunOutcome {
  int exit_code = exit_code::success;
  std::string message;
  std::vector<std::string> outputs;  // file names written under the output directory
};

/// Runs one experiment and writes its artifacts plus manifest.json. Errors
/// are caught, reported on `err` and mapped to exit codes.
RunOutcome run_experiment(const RunRequest& request, std::ostream& out, std::ostream& err);

}  // namespace jumpom
