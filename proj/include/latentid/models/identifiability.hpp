#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "latentid/models/model.hpp"

namespace latentid::models {

/// Natural parameters of a diagonal Gaussian, interleaved per dimension:
/// (μ_i/σ_i², -1/(2σ_i²)) for i = 0..d_z-1.
std::vector<double> natural_params(const ConditionalGaussianPrior& prior, std::size_t u);
std::vector<double> natural_params(const GaussianMixturePrior& prior, std::size_t u);

/// Inverse of natural_params: per dimension (mean, variance).
std::vector<std::pair<double, double>> moments_from_natural(const std::vector<double>& lambda);

/// Invertibility test for L = (λ(u_1) - λ(u_0), …, λ(u_{2d}) - λ(u_0)).
struct IdentifiabilityCheck {
  Matrix L;
  double condition_number = 0.0;
  std::size_t required_u_count = 0;
  std::size_t available_components = 0;
  std::vector<std::size_t> u_indices;
  bool satisfied = false;
};

/// `u_indices` must hold exactly 2·d_z + 1 distinct valid components; the
/// first one is u_0. `satisfied` requires a finite condition number and a
/// prior with at least 2·d_z + 1 components.
IdentifiabilityCheck build_L_matrix(const ConditionalGaussianPrior& prior, const std::vector<std::size_t>& u_indices);
IdentifiabilityCheck build_L_matrix(const GaussianMixturePrior& prior, const std::vector<std::size_t>& u_indices);

/// The first min(K, 2·d_z + 1) components.
std::vector<std::size_t> default_u_indices(std::size_t n_components, std::size_t d_z);

/// Returns the prior untouched when `check.satisfied`; otherwise adds
/// N(0, noise_scale²) to means and log-variances and re-checks, up to 10
/// times, then throws InvalidArgument.
ConditionalGaussianPrior enforce_identifiability(const ConditionalGaussianPrior& prior,
                                                 const IdentifiabilityCheck& check, double noise_scale,
                                                 RngStream& rng);
GaussianMixturePrior enforce_identifiability(const GaussianMixturePrior& prior,
                                             const IdentifiabilityCheck& check, double noise_scale,
                                             RngStream& rng);

/// elbo - alpha·CN(L); an infinite CN (with alpha > 0) yields -infinity.
double penalized_objective(double elbo, const IdentifiabilityCheck& check, double alpha);

/// ∂CN(L)/∂(means, log_vars) for the components named in `u_indices`, as
/// K × d_z matrices. Requires a finite condition number.
std::pair<Matrix, Matrix> condition_number_gradient(const Matrix& means, const Matrix& log_vars,
                                                    const std::vector<std::size_t>& u_indices);

}  // namespace latentid::models
