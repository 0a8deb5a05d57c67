#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "latentid/datagen/dataset.hpp"
#include "latentid/harness/config.hpp"
#include "latentid/models/model.hpp"

namespace latentid::harness {

struct TracePoint {
  std::size_t step = 0;
  double train_elbo = 0.0;  // mean minibatch ELBO since the previous point
  double eval_elbo = 0.0;
  double lr = 0.0;
  double condition_number = 0.0;  // 0 when the L check is off or not applicable
};

/// One trained restart. `representation` and `baseline_representation` hold
/// μ_φ over the evaluation set after training and at step 0.
struct RunArtifact {
  std::uint64_t seed = 0;
  models::GenerativeModel model;
  Matrix representation;
  Matrix baseline_representation;
  double initial_eval_elbo = 0.0;
  double final_train_elbo = 0.0;
  double final_eval_elbo = 0.0;
  std::vector<TracePoint> trace;
  std::size_t identifiability_repairs = 0;
  double wall_clock_seconds = 0.0;
};

void to_json(nlohmann::json& j, const TracePoint& t);

/// Per-seed RNG streams; stream ids are fixed so runs are reproducible.
enum class Stream : std::uint64_t { init = 1, batches = 2, noise = 3, eval = 4, repair = 5 };

/// Builds the model configuration for a dataset: d_x from the data and, for
/// iVAE, K from the label count unless K was set explicitly (then it must match).
models::ModelConfig resolve_model_config(const ExperimentConfig& cfg, const LabeledDataset& data);

/// ELBO of the whole set, eval mode, with a noise stream fixed by `seed`.
double evaluation_elbo(const models::GenerativeModel& model, const LabeledDataset& data, std::uint64_t seed);

/// Minibatch ADAM on -ELBO with epoch-wise reshuffling, plateau decay driven
/// by the evaluation ELBO, and L-matrix repair at each evaluation. Throws
/// NumericalError with the step index on a non-finite objective.
RunArtifact train_model(const ExperimentConfig& cfg, const LabeledDataset& train, const LabeledDataset& eval,
                        std::uint64_t seed, const std::function<void(const TracePoint&)>& on_eval = {});

/// Labels passed to the encoder (iVAE only).
models::LabelSpan encoder_labels(const models::GenerativeModel& model, const LabeledDataset& data);

}  // namespace latentid::harness
