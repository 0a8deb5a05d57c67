#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "latentid/ndmath/matrix.hpp"

namespace latentid::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Moment buffers for a fixed list of parameter tensors.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;

  AdamState() = default;
  /// Zero moments shaped like `params`.
  AdamState(AdamConfig cfg, std::span<Matrix* const> params);
};

/// One bias-corrected ADAM descent step over every tensor. `grads[i]` must
/// match `params[i]` in shape. Elementwise, so the result does not depend on
/// how the coordinates are grouped into tensors.
void adam_step(AdamState& state, std::span<Matrix* const> params, std::span<const Matrix> grads);

/// Reduce-on-plateau for a metric that should increase (an ELBO). The rate
/// is multiplied by `decay_factor` after `patience` consecutive evaluations
/// without an improvement larger than `min_improvement` over the best value.
struct PlateauScheduler {
  double decay_factor = 0.5;
  std::size_t patience = 5;
  double min_improvement = 1e-3;
  double best_metric = -std::numeric_limits<double>::infinity();
  std::size_t bad_windows = 0;

  void validate() const;
};

double plateau_update(PlateauScheduler& sched, double metric, double current_lr);

}  // namespace latentid::nn
