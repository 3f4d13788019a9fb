#pragma once

// JSON-configured experiments: schema validation with defaults, deterministic
// seeding, provenance headers and the task runners behind the CLI.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "qrotor/gibbs.hpp"

namespace qrotor {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kTasks = {"validate-graph", "simulate", "rdm",     "dlr-check",
                                                "gauge-sweep",    "break-sym", "lemma11"};

struct ExperimentConfig {
  nlohmann::json resolved;  // every field, defaults filled in
  std::string task;
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 1;          // not part of the resolved config; outputs do not depend on it
  std::string out_dir = ".";

  /// FNV-1a of the resolved config without the output block, as 16 hex digits.
  std::string hash() const;
};

/// Validates the raw tree and fills defaults; throws ConfigError naming the
/// offending key.
ExperimentConfig parse_config(const nlohmann::json& raw);
ExperimentConfig load_config(const std::string& path);

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<int> chains;
  std::optional<int> threads;
  std::optional<std::string> task;
};
ExperimentConfig apply_overrides(const ExperimentConfig& cfg, const Overrides& o);

/// Model block -> ModelSpec. Throws ConfigError when the block is absent.
ModelSpec build_model(const ExperimentConfig& cfg);

/// "# key: value" lines: program version, task, config hash, seed, config.
std::string provenance_header(const ExperimentConfig& cfg, const std::string& task);
nlohmann::json provenance_json(const ExperimentConfig& cfg, const std::string& task);

/// %.17g
std::string format_double(double x);

struct TaskOutcome {
  bool pass = true;  // task-level verdict where one exists (validate-graph, dlr-check)
  std::vector<std::string> files;
  nlohmann::json summary;
};

TaskOutcome run_experiment(const ExperimentConfig& cfg);

/// Recompute an observable from configuration dumps. `observable` is
/// {"kind": "energy"} or {"kind": "arc", "center": c, "half_width": w}.
TaskOutcome replay(const std::vector<std::string>& dumps, const nlohmann::json& observable,
                   const std::string& out_dir);

}  // namespace qrotor
