#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rfs/conic.hpp"
#include "rfs/dataset.hpp"
#include "rfs/eval.hpp"
#include "rfs/types.hpp"

namespace rfs::cli {

struct DatasetConfig {
  std::string id = "GC";
  /// Empty means the bundled German Credit file.
  std::filesystem::path path;
  /// Empty (null) means the bundled German Credit schema.
  nlohmann::json schema;
  data::PreprocessConfig preprocess;

  data::RawTable load() const;
};

struct ModelConfig {
  std::string name;
  ModelFamily family = ModelFamily::LR;
  std::optional<HyperParams> hyperparams;
  std::optional<eval::HyperGrid> grid;
  eval::EtaRule eta_rule;
};

struct EvalConfig {
  int k = 5;
  std::uint64_t seed = 0;
  std::vector<std::string> metrics = eval::kMetrics;
};

enum class ExperimentKind { CV, Sweep, Shift, Table1 };
std::string_view to_string(ExperimentKind k);
ExperimentKind parse_experiment_kind(std::string_view name);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::CV;
  nlohmann::json params = nlohmann::json::object();
};

/// A run configuration. `dataset` may be one object or an array; `model`
/// one object, `models` an array of them.
struct RunConfig {
  std::vector<DatasetConfig> datasets;
  std::vector<ModelConfig> models;
  EvalConfig eval;
  ExperimentConfig experiment;
  conic::SolveOptions solver;
  std::filesystem::path output_dir = "out";
  int threads = 1;

  /// Validates and parses; relative data paths resolve against `base_dir`.
  /// Throws ConfigError on unknown keys or invalid values.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);
  /// Canonical form (threads and output_dir left out: they do not change results).
  nlohmann::json to_json() const;
};

struct Overrides {
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void apply(RunConfig& cfg, const Overrides& o);

inline const std::vector<std::string> kCommands = {"prep", "train", "cv", "sweep", "shift", "table1", "run"};

/// Runs one command; `run` dispatches on experiment.kind. Writes outputs and
/// manifest.json into cfg.output_dir. Throws rfs::Error subclasses.
void run_command(std::string_view command, const RunConfig& cfg);

void cmd_prep(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_cv(const RunConfig& cfg);
void cmd_sweep(const RunConfig& cfg);
void cmd_shift(const RunConfig& cfg);
void cmd_table1(const RunConfig& cfg);

}  // namespace rfs::cli
