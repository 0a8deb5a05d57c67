#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentid/datagen/tcl.hpp"
#include "latentid/models/model.hpp"

namespace latentid::harness {

struct TrainingConfig {
  std::size_t steps = 20000;
  std::size_t batch_size = 64;
  double lr = 1e-3;
  std::size_t eval_interval = 500;
  double plateau_decay = 0.5;
  std::size_t plateau_patience = 5;
  double plateau_min_improvement = 1e-3;
  /// Share of each segment used for training; the rest is the evaluation set.
  double train_fraction = 0.8;
};

struct MetricsConfig {
  std::size_t d_cca = 0;  // 0 selects min(20, d_z)
  double ridge = 1e-7;
  bool absolute_corr = true;
  bool self_pairs = false;
};

struct IdentifiabilityConfig {
  bool check_L = true;
  double alpha = 0.0;  // weight of the condition-number penalty
  double noise_scale = 1e-2;
};

/// Side information fed to iVAE: the dataset's segment labels, or a fixed
/// Rademacher hash of x with `bits` bits.
struct UTaskConfig {
  std::string kind = "segments";
  std::size_t bits = 4;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  models::ModelConfig model;  // d_x is taken from the dataset
  bool n_components_given = false;
  datagen::TclConfig dataset;
  std::optional<std::filesystem::path> dataset_path;
  std::vector<std::uint64_t> seeds{0};
  TrainingConfig training;
  MetricsConfig metrics;
  IdentifiabilityConfig identifiability;
  UTaskConfig u_task;
  std::filesystem::path output_dir = "experiment_out";
  std::size_t jobs = 1;

  /// Throws InvalidArgument on empty or repeated seeds, zero steps or batch
  /// size, and out-of-range numeric settings.
  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

/// Parses and validates; JSON type errors surface as InvalidArgument.
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace latentid::harness
