#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentid/datagen/dataset.hpp"
#include "latentid/harness/config.hpp"
#include "latentid/harness/train.hpp"
#include "latentid/metrics/mcc.hpp"
#include "latentid/metrics/wilcoxon.hpp"

namespace latentid::harness {

/// Data shared by every seed of an experiment. `eval_fit` and `eval_score`
/// index rows of `eval` and form the half/half in-/out-of-sample protocol.
struct PreparedData {
  LabeledDataset full;
  DatasetSplit split;
  LabeledDataset train;
  LabeledDataset eval;
  std::vector<std::size_t> eval_fit;
  std::vector<std::size_t> eval_score;
};

/// Loads or generates the dataset, splits it by segment, and swaps in hashed
/// labels when the iVAE side information is a Rademacher hash.
PreparedData prepare_data(const ExperimentConfig& cfg);

struct RunFailure {
  std::uint64_t seed = 0;
  std::string kind;
  std::string message;
};

/// Strong MCC of one run against the ground-truth sources of the eval set.
struct SourceScores {
  double trained = 0.0;
  double baseline = 0.0;
};

struct PairReport {
  std::uint64_t seed_a = 0;
  std::uint64_t seed_b = 0;
  metrics::MccSplitReport strong;
  metrics::MccSplitReport weak;
  std::optional<SourceScores> sources_a;
  std::optional<SourceScores> sources_b;
};

struct MetricSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population
  std::vector<double> curve_mean;
  std::vector<double> curve_std;
};

struct PairAggregate {
  std::size_t n_pairs = 0;
  MetricSummary strong_in;
  MetricSummary strong_out;
  MetricSummary weak_in;
  MetricSummary weak_out;
};

struct RunSummary {
  std::uint64_t seed = 0;
  double initial_eval_elbo = 0.0;
  double final_eval_elbo = 0.0;
  double final_train_elbo = 0.0;
  std::size_t identifiability_repairs = 0;
  std::optional<SourceScores> sources;
};

struct ExperimentSummary {
  PairAggregate pairs;
  std::vector<RunSummary> runs;
  std::vector<RunFailure> failures;
  std::optional<MetricSummary> mcc_to_sources;
  std::optional<MetricSummary> baseline_mcc_to_sources;
  std::optional<double> elbo_mcc_correlation;  // needs 3+ runs with sources
};

struct ExperimentResult {
  std::vector<RunArtifact> runs;  // surviving runs in seed order
  std::vector<RunFailure> failures;
  std::vector<PairReport> pairs;
  ExperimentSummary summary;
};

/// Mean and population std of final MCC over pairs, plus pointwise curve
/// statistics. Throws InvalidArgument on an empty list.
PairAggregate aggregate(const std::vector<PairReport>& reports);
MetricSummary summarize(const std::vector<const metrics::MccReport*>& reports);
MetricSummary summarize_values(const std::vector<double>& values);

/// Two-sided Wilcoxon signed-rank test on paired final MCC values.
metrics::WilcoxonResult compare_models(std::span<const double> a, std::span<const double> b,
                                       metrics::WilcoxonMethod method = metrics::WilcoxonMethod::automatic);

std::optional<SourceScores> source_scores(const RunArtifact& run, const LabeledDataset& eval);

PairReport compare_runs(const RunArtifact& a, const RunArtifact& b, const PreparedData& data,
                        const MetricsConfig& mc);

/// Seed pairs (i < j, plus i == j when self_pairs) over surviving runs.
std::vector<std::pair<std::size_t, std::size_t>> pair_indices(std::size_t n_runs, bool self_pairs);

/// Trains every seed on `jobs` threads. Failed seeds are collected, not thrown.
std::pair<std::vector<RunArtifact>, std::vector<RunFailure>> train_all(
    const ExperimentConfig& cfg, const PreparedData& data, bool verbose = false);

/// Writes model/, representation.csv, baseline_representation.csv, run.json
/// and timing.json under `dir`.
void write_run(const std::filesystem::path& dir, const RunArtifact& run, const std::optional<SourceScores>& src);

/// Full pipeline. Writes config.json, dataset/, split.json, runs/seed_<s>/,
/// pairs.json and summary.json under cfg.output_dir. Throws when fewer than
/// two runs survive.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool verbose = false);

void to_json(nlohmann::json& j, const RunFailure& f);
void to_json(nlohmann::json& j, const SourceScores& s);
void to_json(nlohmann::json& j, const PairReport& p);
void from_json(const nlohmann::json& j, PairReport& p);
void to_json(nlohmann::json& j, const MetricSummary& m);
void to_json(nlohmann::json& j, const PairAggregate& a);
void to_json(nlohmann::json& j, const RunSummary& r);
void to_json(nlohmann::json& j, const ExperimentSummary& s);

}  // namespace latentid::harness
