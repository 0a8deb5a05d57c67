#include "latentid/models/identifiability.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "latentid/error.hpp"
#include "latentid/ndmath/linalg.hpp"

namespace latentid::models {

namespace {

std::vector<double> natural_from_table(const Matrix& means, const Matrix& log_vars, std::size_t u) {
  if (u >= means.rows()) throw InvalidArgument("natural_params: u = " + std::to_string(u) + " out of range");
  std::vector<double> out(2 * means.cols());
  for (std::size_t i = 0; i < means.cols(); ++i) {
    const double inv_var = std::exp(-log_vars(u, i));
    out[2 * i] = means(u, i) * inv_var;
    out[2 * i + 1] = -0.5 * inv_var;
  }
  return out;
}

IdentifiabilityCheck build_from_table(const Matrix& means, const Matrix& log_vars,
                                      const std::vector<std::size_t>& u_indices) {
  const std::size_t d = means.cols();
  const std::size_t required = 2 * d + 1;
  if (u_indices.size() != required)
    throw InvalidArgument("build_L_matrix: need exactly " + std::to_string(required) + " u values, got " +
                          std::to_string(u_indices.size()));
  if (std::set<std::size_t>(u_indices.begin(), u_indices.end()).size() != u_indices.size())
    throw InvalidArgument("build_L_matrix: u values must be distinct");

  IdentifiabilityCheck check;
  check.required_u_count = required;
  check.available_components = means.rows();
  check.u_indices = u_indices;
  check.L = Matrix(2 * d, 2 * d);
  const std::vector<double> base = natural_from_table(means, log_vars, u_indices[0]);
  for (std::size_t c = 0; c + 1 < required; ++c) {
    const std::vector<double> lam = natural_from_table(means, log_vars, u_indices[c + 1]);
    for (std::size_t r = 0; r < 2 * d; ++r) check.L(r, c) = lam[r] - base[r];
  }
  check.condition_number = condition_number(check.L);
  check.satisfied = std::isfinite(check.condition_number) && means.rows() >= required;
  return check;
}

template <typename PriorT>
PriorT enforce(const PriorT& prior, const IdentifiabilityCheck& check, double noise_scale, RngStream& rng) {
  if (check.satisfied) return prior;
  if (noise_scale < 0.0) throw InvalidArgument("enforce_identifiability: noise_scale must be non-negative");
  constexpr int kRetries = 10;
  PriorT current = prior;
  for (int attempt = 0; attempt < kRetries; ++attempt) {
    if (noise_scale > 0.0) {
      for (double& v : current.means.values()) v += noise_scale * rng.normal();
      for (double& v : current.log_vars.values()) v += noise_scale * rng.normal();
    }
    if (build_L_matrix(current, check.u_indices).satisfied) return current;
  }
  throw InvalidArgument("enforce_identifiability: L still singular after 10 noise injections");
}

}  // namespace

std::vector<double> natural_params(const ConditionalGaussianPrior& prior, std::size_t u) {
  return natural_from_table(prior.means, prior.log_vars, u);
}

std::vector<double> natural_params(const GaussianMixturePrior& prior, std::size_t u) {
  return natural_from_table(prior.means, prior.log_vars, u);
}

std::vector<std::pair<double, double>> moments_from_natural(const std::vector<double>& lambda) {
  if (lambda.size() % 2 != 0) throw InvalidArgument("moments_from_natural: odd length");
  std::vector<std::pair<double, double>> out(lambda.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double var = -0.5 / lambda[2 * i + 1];
    out[i] = {lambda[2 * i] * var, var};
  }
  return out;
}

IdentifiabilityCheck build_L_matrix(const ConditionalGaussianPrior& prior, const std::vector<std::size_t>& u_indices) {
  return build_from_table(prior.means, prior.log_vars, u_indices);
}

IdentifiabilityCheck build_L_matrix(const GaussianMixturePrior& prior, const std::vector<std::size_t>& u_indices) {
  return build_from_table(prior.means, prior.log_vars, u_indices);
}

std::vector<std::size_t> default_u_indices(std::size_t n_components, std::size_t d_z) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < std::min(n_components, 2 * d_z + 1); ++k) out.push_back(k);
  return out;
}

ConditionalGaussianPrior enforce_identifiability(const ConditionalGaussianPrior& prior,
                                                 const IdentifiabilityCheck& check, double noise_scale,
                                                 RngStream& rng) {
  return enforce(prior, check, noise_scale, rng);
}

GaussianMixturePrior enforce_identifiability(const GaussianMixturePrior& prior, const IdentifiabilityCheck& check,
                                             double noise_scale, RngStream& rng) {
  return enforce(prior, check, noise_scale, rng);
}

double penalized_objective(double elbo, const IdentifiabilityCheck& check, double alpha) {
  if (alpha < 0.0) throw InvalidArgument("penalized_objective: alpha must be non-negative");
  if (alpha == 0.0) return elbo;
  if (!std::isfinite(check.condition_number)) return -std::numeric_limits<double>::infinity();
  return elbo - alpha * check.condition_number;
}

std::pair<Matrix, Matrix> condition_number_gradient(const Matrix& means, const Matrix& log_vars,
                                                    const std::vector<std::size_t>& u_indices) {
  const IdentifiabilityCheck check = build_from_table(means, log_vars, u_indices);
  if (!std::isfinite(check.condition_number))
    throw InvalidArgument("condition_number_gradient: L is singular");
  const std::size_t d = means.cols();
  const std::size_t m = 2 * d;
  const SvdResult s = svd(check.L);
  const double smax = s.s.front();
  const double smin = s.s.back();
  // ∂σ_i/∂L = u_i v_iᵀ, so ∂(σ_max/σ_min)/∂L = u₁v₁ᵀ/σ_min − σ_max/σ_min² · u_m v_mᵀ.
  Matrix g_l(m, m);
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < m; ++c)
      g_l(r, c) = s.u(r, 0) * s.v(c, 0) / smin - smax / (smin * smin) * s.u(r, m - 1) * s.v(c, m - 1);

  // Column c of L is λ(u_{c+1}) - λ(u_0).
  Matrix g_lambda(means.rows(), m);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t r = 0; r < m; ++r) {
      g_lambda(u_indices[c + 1], r) += g_l(r, c);
      g_lambda(u_indices[0], r) -= g_l(r, c);
    }
  }
  Matrix g_means(means.rows(), d), g_lv(means.rows(), d);
  for (std::size_t k : u_indices) {
    for (std::size_t i = 0; i < d; ++i) {
      const double inv_var = std::exp(-log_vars(k, i));
      const double g1 = g_lambda(k, 2 * i);
      const double g2 = g_lambda(k, 2 * i + 1);
      // λ₁ = μ e^{-lv}, λ₂ = -½ e^{-lv}
      g_means(k, i) = g1 * inv_var;
      g_lv(k, i) = -g1 * means(k, i) * inv_var + g2 * 0.5 * inv_var;
    }
  }
  return {std::move(g_means), std::move(g_lv)};
}

}  // namespace latentid::models
