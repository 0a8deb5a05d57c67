#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "latentid/ndmath/matrix.hpp"
#include "latentid/ndmath/rng.hpp"
#include "latentid/nn/mlp.hpp"

namespace latentid::models {

enum class ModelKind { vae, ivae, vade };

std::string to_string(ModelKind kind);
/// Accepts "vae", "ivae", "vade" (case-insensitive).
ModelKind parse_model_kind(const std::string& name);

struct StandardNormalPrior {};

/// p(z|u) = N(means[u], diag(exp(log_vars[u]))), a lookup table over u.
struct ConditionalGaussianPrior {
  Matrix means;     // K × d_z
  Matrix log_vars;  // K × d_z
  std::size_t n_components() const noexcept { return means.rows(); }
};

/// p(z) = Σ_k softmax(logits)_k · N(means[k], diag(exp(log_vars[k]))).
struct GaussianMixturePrior {
  Matrix logits;    // 1 × K
  Matrix means;     // K × d_z
  Matrix log_vars;  // K × d_z
  std::size_t n_components() const noexcept { return means.rows(); }
  std::vector<double> log_weights() const;
};

using Prior = std::variant<StandardNormalPrior, ConditionalGaussianPrior, GaussianMixturePrior>;

struct ModelConfig {
  ModelKind kind = ModelKind::vade;
  std::size_t d_x = 5;
  std::size_t d_z = 5;
  /// u values for iVAE, mixture components for VaDE; ignored for VAE.
  std::size_t n_components = 40;
  std::vector<std::size_t> encoder_hidden{64, 64};
  std::vector<std::size_t> decoder_hidden{64, 64};
  double activation_slope = 0.1;
  double dropout_rate = 0.1;
  double decoder_log_var = -4.605170185988091;  // log(0.01)
};

/// Encoder/decoder MLPs plus one of three latent priors. The encoder emits
/// [μ, log σ²] side by side; the iVAE encoder sees [x, onehot(u)].
struct GenerativeModel {
  ModelKind kind = ModelKind::vae;
  std::size_t d_x = 0;
  std::size_t d_z = 0;
  std::size_t n_components = 0;
  nn::MlpSpec encoder_spec;
  nn::MlpParams encoder;
  nn::MlpSpec decoder_spec;
  nn::MlpParams decoder;
  Prior prior;
  double decoder_log_var = 0.0;

  /// Trainable tensors in a fixed order: encoder (W, b per layer), decoder
  /// (W, b per layer), then prior tensors (iVAE: means, log_vars;
  /// VaDE: logits, means, log_vars).
  std::vector<Matrix*> parameters();
  /// Marks encoder and decoder weights as modified.
  void touch();
  /// Throws InvalidArgument when shapes disagree with kind/d_x/d_z/K.
  void validate() const;
};

/// Xavier-uniform encoder/decoder; the iVAE table and the mixture means and
/// log-variances are Xavier-uniform on their K × d_z shape; mixture logits
/// start at zero (uniform weights).
GenerativeModel make_model(const ModelConfig& cfg, RngStream& rng);

struct EncoderOutput {
  Matrix mu;
  Matrix log_var;
};

using LabelSpan = std::optional<std::span<const std::size_t>>;

/// One-hot rows for labels in [0, k).
Matrix one_hot(std::span<const std::size_t> labels, std::size_t k);

/// Labels must be given exactly when the model is an iVAE.
EncoderOutput encode(const GenerativeModel& model, const Matrix& x, LabelSpan u, bool train_mode,
                     RngStream& rng);

/// z = μ + exp(log σ²/2) ⊙ η with η ~ N(0, I), one sample per row.
Matrix reparameterize(const EncoderOutput& enc, RngStream& rng);

/// Posterior means μ_φ(x), dropout off.
Matrix extract_representations(const GenerativeModel& model, const Matrix& x, LabelSpan u = std::nullopt);

}  // namespace latentid::models
