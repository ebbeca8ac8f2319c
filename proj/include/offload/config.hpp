#pragma once

// Experiment configuration file: grid, ground truth, model hyperparameters and the
// evaluation plan in one JSON document. Every section is optional; unknown keys are errors.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "offload/evaluation.hpp"
#include "offload/simulator.hpp"

namespace offload {

struct ExperimentConfig {
  GridConfig grid = default_grid();
  GroundTruthModel ground_truth;
  /// Seed of the trace grid.
  std::uint64_t seed = 42;
  /// Worker threads for trace simulation; results do not depend on it.
  unsigned threads = 1;
  /// Strides applied by --quick.
  std::size_t quick_stress_stride = 5;
  std::size_t quick_image_stride = 2;

  EstimatorOptions estimators;
  EvaluationPlan plan;
  /// Seed of the evaluation splits.
  std::uint64_t eval_seed = 7;

  void validate() const;
};

ExperimentConfig default_experiment_config();

/// Throws ConfigError naming the offending key path.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& config);

/// Reads and validates a config file; ConfigError / ParseError name the path.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

}  // namespace offload
