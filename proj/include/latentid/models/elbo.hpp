#pragma once

#include <vector>

#include "latentid/models/model.hpp"

namespace latentid::models {

/// Per-batch means. total == recon - kl exactly.
struct ElboBreakdown {
  double recon = 0.0;
  double kl = 0.0;
  double total = 0.0;
};

/// Mean over rows of Σ_j [-½ log(2πσ²) - (x_j - x̂_j)²/(2σ²)], σ² = exp(log_var).
double gaussian_log_likelihood(const Matrix& x, const Matrix& x_hat, double log_var);

/// Closed-form KL(q ‖ p) between diagonal Gaussians, summed over dimensions
/// and averaged over rows.
double kl_diag_gaussians(const Matrix& q_mu, const Matrix& q_log_var, const Matrix& p_mu,
                         const Matrix& p_log_var);

/// log N(z_r; means[k], diag(exp(log_vars[k]))) for every row r and component k.
Matrix component_log_densities(const Matrix& z, const Matrix& means, const Matrix& log_vars);

/// VaDE single-sample ELBO terms are all evaluated at one reparameterised z.
ElboBreakdown elbo_vae(const GenerativeModel& model, const Matrix& x, RngStream& rng,
                       bool train_mode = false);
ElboBreakdown elbo_ivae(const GenerativeModel& model, const Matrix& x,
                        std::span<const std::size_t> u, RngStream& rng, bool train_mode = false);
/// KL part: KL(q ‖ N_k*) + log N_k*(z) - log p_GMM(z), where k* maximises
/// log π_k - KL(q ‖ N_k) row by row. The last two terms have zero mean under
/// q, so this is an unbiased estimate of KL(q ‖ p_GMM) that collapses to the
/// closed form when K = 1.
ElboBreakdown elbo_vade_mc(const GenerativeModel& model, const Matrix& x, RngStream& rng,
                           bool train_mode = false);

/// Cluster posterior p(u|z): π_k N(z; μ_k, Σ_k) normalised per row (log-space).
Matrix responsibilities(const GenerativeModel& model, const Matrix& z);

struct ModelGradients {
  nn::MlpGradients encoder;
  nn::MlpGradients decoder;
  std::vector<Matrix> prior;  // same order as GenerativeModel::parameters()

  /// Flattened into the order of GenerativeModel::parameters().
  std::vector<Matrix> flatten() const;
};

struct ElboWithGradients {
  ElboBreakdown elbo;
  ModelGradients grads;  // ∂ total / ∂ parameters
};

/// Kind-dispatched ELBO with reverse-mode gradients of `total`. Consumes the
/// RNG in the same order as elbo_vae/elbo_ivae/elbo_vade_mc.
ElboWithGradients elbo_with_gradients(const GenerativeModel& model, const Matrix& x, LabelSpan u,
                                      RngStream& rng, bool train_mode);

/// Kind-dispatched ELBO value.
ElboBreakdown elbo(const GenerativeModel& model, const Matrix& x, LabelSpan u, RngStream& rng,
                   bool train_mode = false);

}  // namespace latentid::models
