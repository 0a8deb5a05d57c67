#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "latentid/ndmath/matrix.hpp"
#include "latentid/ndmath/rng.hpp"

namespace latentid::nn {

/// Fully-connected network shape: affine -> LeakyReLU on every hidden layer,
/// optional dropout after the second hidden layer (after the first when there
/// is only one), and a linear output layer when `final_linear` is set.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;
  double activation_slope = 0.1;
  double dropout_rate = 0.0;
  bool final_linear = true;

  std::size_t input_width() const { return layer_widths.front(); }
  std::size_t output_width() const { return layer_widths.back(); }
  std::size_t num_layers() const { return layer_widths.size() - 1; }
  /// Index of the layer whose activated output is followed by dropout.
  std::optional<std::size_t> dropout_layer() const;

  /// Throws InvalidArgument when the invariants do not hold.
  void validate() const;

  friend bool operator==(const MlpSpec&, const MlpSpec&) = default;
};

struct Layer {
  Matrix weight;  // fan_in × fan_out
  Matrix bias;    // 1 × fan_out
};

struct MlpParams {
  std::vector<Layer> layers;
  /// Bumped by every library mutation (init, optimiser step) so that a tape
  /// recorded against older weights is rejected by backward().
  std::uint64_t version = 0;

  void touch() noexcept;
};

/// Gradients share the layout of MlpParams.
using MlpGradients = std::vector<Layer>;

MlpGradients zeros_like(const MlpParams& params);

/// Weights U(±√(6/(fan_in+fan_out))), biases zero.
MlpParams init_xavier_uniform(const MlpSpec& spec, RngStream& rng);

/// Everything backward() needs from a forward pass.
struct Tape {
  std::uint64_t params_version = 0;
  std::vector<std::size_t> widths;
  std::vector<Matrix> layer_inputs;     // input of layer l (after dropout)
  std::vector<Matrix> pre_activations;  // x·W + b of layer l
  std::optional<std::size_t> dropout_layer;
  Matrix dropout_scale;                 // 0 or 1/(1-p) per unit; empty when inactive
};

struct ForwardResult {
  Matrix output;
  Tape tape;
};

/// Dropout is drawn from `rng` only when `train_mode` is set; eval mode
/// consumes no randomness and is a pure function of (params, x).
ForwardResult forward(const MlpParams& params, const MlpSpec& spec, const Matrix& x,
                      bool train_mode, RngStream& rng);

/// Eval-mode forward without a tape.
Matrix predict(const MlpParams& params, const MlpSpec& spec, const Matrix& x);

struct BackwardResult {
  MlpGradients grads;
  Matrix input_grad;
};

/// Reverse pass for ∂loss/∂output = `output_grad`. Throws ShapeError for a
/// gradient of the wrong shape and InvalidArgument for a tape that was not
/// recorded against `params` in their current version.
BackwardResult backward(const MlpParams& params, const MlpSpec& spec, const Tape& tape,
                        const Matrix& output_grad);

}  // namespace latentid::nn
