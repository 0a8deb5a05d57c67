#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "latentid/datagen/dataset.hpp"
#include "latentid/ndmath/matrix.hpp"
#include "latentid/ndmath/rng.hpp"
#include "latentid/nn/mlp.hpp"

#include <json.hpp>

namespace latentid::datagen {

/// Segmented (time-contrastive) synthetic data: per-segment Gaussian sources
/// pushed through a random full-rank LeakyReLU MLP.
struct TclConfig {
  std::size_t d = 5;
  std::size_t n_segments = 20;
  std::size_t samples_per_segment = 500;
  std::size_t n_mixing_layers = 4;
  double mean_lo = -3.0;
  double mean_hi = 3.0;
  double std_lo = 0.01;
  double std_hi = 3.0;
  double min_singular_value = 0.1;
  double activation_slope = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TclConfig&, const TclConfig&) = default;
};

void to_json(nlohmann::json& j, const TclConfig& c);
void from_json(const nlohmann::json& j, TclConfig& c);

struct SegmentParams {
  Matrix means;  // n_segments × d
  Matrix stds;   // n_segments × d
};

struct Sources {
  Matrix s;
  std::vector<std::size_t> u;
  SegmentParams params;
};

struct MixingNetwork {
  nn::MlpSpec spec;
  nn::MlpParams params;
};

/// Rows are grouped by segment: segment k occupies rows
/// [k·samples_per_segment, (k+1)·samples_per_segment).
Sources generate_sources(const TclConfig& cfg, RngStream& rng);

/// Square d×d layers, each resampled until its smallest singular value is at
/// least cfg.min_singular_value; zero biases; LeakyReLU between layers and a
/// linear last layer. Throws InvalidArgument after 100 consecutive rejections.
MixingNetwork sample_mixing_mlp(const TclConfig& cfg, RngStream& rng);

Matrix mix_sources(const MixingNetwork& net, const Matrix& s);

struct SyntheticDataset {
  LabeledDataset data;
  SegmentParams segments;
  MixingNetwork mixing;
};

SyntheticDataset generate_tcl_dataset(const TclConfig& cfg, RngStream& rng);
/// Uses the stream (cfg.seed, 0).
SyntheticDataset generate_tcl_dataset(const TclConfig& cfg);

/// Directory layout: X.csv, S.csv (when sources exist), U.csv, config.json.
void write_dataset_dir(const std::filesystem::path& dir, const LabeledDataset& ds,
                       const nlohmann::json& config);
LabeledDataset read_dataset_dir(const std::filesystem::path& dir);

}  // namespace latentid::datagen
