#include "latentid/models/elbo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "latentid/error.hpp"

namespace latentid::models {

namespace detail {
Matrix encoder_input(const GenerativeModel& model, const Matrix& x, LabelSpan u);
EncoderOutput split_heads(const Matrix& out, std::size_t d_z);
}  // namespace detail

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
}

double kl_row(const double* qmu, const double* qlv, const double* pmu, const double* plv, std::size_t d) {
  double acc = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = qmu[j] - pmu[j];
    acc += 0.5 * ((plv[j] - qlv[j]) + (std::exp(qlv[j]) + diff * diff) * std::exp(-plv[j]) - 1.0);
  }
  return acc;
}

double log_sum_exp(std::span<const double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : v) acc += std::exp(x - m);
  return m + std::log(acc);
}

// Everything produced by one stochastic pass through encoder and decoder.
struct Pass {
  nn::ForwardResult enc;
  EncoderOutput q;
  Matrix eta;
  Matrix z;
  nn::ForwardResult dec;
};

Pass run_pass(const GenerativeModel& model, const Matrix& x, LabelSpan u, RngStream& rng, bool train_mode) {
  Pass p;
  const Matrix in = detail::encoder_input(model, x, u);
  p.enc = nn::forward(model.encoder, model.encoder_spec, in, train_mode, rng);
  p.q = detail::split_heads(p.enc.output, model.d_z);
  p.eta = Matrix(x.rows(), model.d_z);
  p.z = p.q.mu;
  auto zv = p.z.values();
  auto ev = p.eta.values();
  auto lv = p.q.log_var.values();
  for (std::size_t i = 0; i < zv.size(); ++i) {
    ev[i] = rng.normal();
    zv[i] += std::exp(0.5 * lv[i]) * ev[i];
  }
  p.dec = nn::forward(model.decoder, model.decoder_spec, p.z, train_mode, rng);
  return p;
}

// Row-wise reference Gaussian for the closed-form KL and, for VaDE, the
// sampled correction. `component[r]` is the table row used for row r.
struct KlTerms {
  std::vector<double> rows;
  std::vector<std::size_t> component;
  Matrix log_dens;    // VaDE only: n × K
  Matrix resp;        // VaDE only: n × K
  std::vector<double> log_weights;
};

KlTerms kl_terms(const GenerativeModel& model, const Pass& p, LabelSpan u) {
  const std::size_t n = p.z.rows();
  const std::size_t d = model.d_z;
  KlTerms t;
  t.rows.resize(n);
  t.component.assign(n, 0);
  switch (model.kind) {
    case ModelKind::vae: {
      const std::vector<double> zero(d, 0.0);
      for (std::size_t r = 0; r < n; ++r)
        t.rows[r] = kl_row(p.q.mu.row(r).data(), p.q.log_var.row(r).data(), zero.data(), zero.data(), d);
      break;
    }
    case ModelKind::ivae: {
      const auto& prior = std::get<ConditionalGaussianPrior>(model.prior);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t k = (*u)[r];
        t.component[r] = k;
        t.rows[r] = kl_row(p.q.mu.row(r).data(), p.q.log_var.row(r).data(), prior.means.row(k).data(),
                           prior.log_vars.row(k).data(), d);
      }
      break;
    }
    case ModelKind::vade: {
      const auto& prior = std::get<GaussianMixturePrior>(model.prior);
      const std::size_t kk = prior.n_components();
      t.log_weights = prior.log_weights();
      t.log_dens = component_log_densities(p.z, prior.means, prior.log_vars);
      t.resp = Matrix(n, kk);
      std::vector<double> joint(kk);
      for (std::size_t r = 0; r < n; ++r) {
        const double* qmu = p.q.mu.row(r).data();
        const double* qlv = p.q.log_var.row(r).data();
        std::size_t best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        double best_kl = 0.0;
        for (std::size_t k = 0; k < kk; ++k) {
          const double kl = kl_row(qmu, qlv, prior.means.row(k).data(), prior.log_vars.row(k).data(), d);
          const double score = t.log_weights[k] - kl;
          if (score > best_score) {
            best_score = score;
            best = k;
            best_kl = kl;
          }
          joint[k] = t.log_weights[k] + t.log_dens(r, k);
        }
        const double log_p = log_sum_exp(joint);
        for (std::size_t k = 0; k < kk; ++k) t.resp(r, k) = std::exp(joint[k] - log_p);
        t.component[r] = best;
        t.rows[r] = best_kl + (t.log_dens(r, best) - log_p);
      }
      break;
    }
  }
  return t;
}

double mean_of(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

void check_kind(const GenerativeModel& model, ModelKind kind, const char* fn) {
  if (model.kind != kind) throw InvalidArgument(std::string(fn) + ": model is a " + to_string(model.kind));
}

ElboBreakdown assemble(double recon, double kl) { return ElboBreakdown{recon, kl, recon - kl}; }

}  // namespace

double gaussian_log_likelihood(const Matrix& x, const Matrix& x_hat, double log_var) {
  require_same_shape(x, x_hat, "gaussian_log_likelihood");
  if (x.rows() == 0) throw InvalidArgument("gaussian_log_likelihood: empty batch");
  const double c = -0.5 * (kLog2Pi + log_var);
  const double inv2var = 0.5 * std::exp(-log_var);
  double total = 0.0;
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double row = 0.0;
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double res = x(r, j) - x_hat(r, j);
      row += c - res * res * inv2var;
    }
    total += row;
  }
  return total / static_cast<double>(x.rows());
}

double kl_diag_gaussians(const Matrix& q_mu, const Matrix& q_log_var, const Matrix& p_mu,
                         const Matrix& p_log_var) {
  require_same_shape(q_mu, q_log_var, "kl_diag_gaussians");
  require_same_shape(q_mu, p_mu, "kl_diag_gaussians");
  require_same_shape(q_mu, p_log_var, "kl_diag_gaussians");
  if (q_mu.rows() == 0) throw InvalidArgument("kl_diag_gaussians: empty batch");
  std::vector<double> rows(q_mu.rows());
  for (std::size_t r = 0; r < q_mu.rows(); ++r)
    rows[r] = kl_row(q_mu.row(r).data(), q_log_var.row(r).data(), p_mu.row(r).data(),
                     p_log_var.row(r).data(), q_mu.cols());
  return mean_of(rows);
}

Matrix component_log_densities(const Matrix& z, const Matrix& means, const Matrix& log_vars) {
  require_same_shape(means, log_vars, "component_log_densities");
  if (z.cols() != means.cols()) throw ShapeError("component_log_densities: dimension mismatch");
  Matrix out(z.rows(), means.rows());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t k = 0; k < means.rows(); ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < z.cols(); ++j) {
        const double diff = z(r, j) - means(k, j);
        acc += -0.5 * (kLog2Pi + log_vars(k, j) + diff * diff * std::exp(-log_vars(k, j)));
      }
      out(r, k) = acc;
    }
  }
  return out;
}

Matrix responsibilities(const GenerativeModel& model, const Matrix& z) {
  check_kind(model, ModelKind::vade, "responsibilities");
  const auto& prior = std::get<GaussianMixturePrior>(model.prior);
  const Matrix dens = component_log_densities(z, prior.means, prior.log_vars);
  const std::vector<double> lw = prior.log_weights();
  Matrix out(z.rows(), prior.n_components());
  std::vector<double> joint(prior.n_components());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    for (std::size_t k = 0; k < joint.size(); ++k) joint[k] = lw[k] + dens(r, k);
    const double lp = log_sum_exp(joint);
    for (std::size_t k = 0; k < joint.size(); ++k) out(r, k) = std::exp(joint[k] - lp);
  }
  return out;
}

ElboBreakdown elbo(const GenerativeModel& model, const Matrix& x, LabelSpan u, RngStream& rng,
                   bool train_mode) {
  if (x.rows() == 0) throw InvalidArgument("elbo: empty batch");
  const Pass p = run_pass(model, x, u, rng, train_mode);
  const double recon = gaussian_log_likelihood(x, p.dec.output, model.decoder_log_var);
  const KlTerms t = kl_terms(model, p, u);
  return assemble(recon, mean_of(t.rows));
}

ElboBreakdown elbo_vae(const GenerativeModel& model, const Matrix& x, RngStream& rng, bool train_mode) {
  check_kind(model, ModelKind::vae, "elbo_vae");
  return elbo(model, x, std::nullopt, rng, train_mode);
}

ElboBreakdown elbo_ivae(const GenerativeModel& model, const Matrix& x, std::span<const std::size_t> u,
                        RngStream& rng, bool train_mode) {
  check_kind(model, ModelKind::ivae, "elbo_ivae");
  return elbo(model, x, u, rng, train_mode);
}

ElboBreakdown elbo_vade_mc(const GenerativeModel& model, const Matrix& x, RngStream& rng, bool train_mode) {
  check_kind(model, ModelKind::vade, "elbo_vade_mc");
  return elbo(model, x, std::nullopt, rng, train_mode);
}

std::vector<Matrix> ModelGradients::flatten() const {
  std::vector<Matrix> out;
  for (const auto& l : encoder) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  for (const auto& l : decoder) {
    out.push_back(l.weight);
    out.push_back(l.bias);
  }
  out.insert(out.end(), prior.begin(), prior.end());
  return out;
}

ElboWithGradients elbo_with_gradients(const GenerativeModel& model, const Matrix& x, LabelSpan u,
                                      RngStream& rng, bool train_mode) {
  if (x.rows() == 0) throw InvalidArgument("elbo: empty batch");
  const Pass p = run_pass(model, x, u, rng, train_mode);
  const double recon = gaussian_log_likelihood(x, p.dec.output, model.decoder_log_var);
  const KlTerms t = kl_terms(model, p, u);

  ElboWithGradients res;
  res.elbo = assemble(recon, mean_of(t.rows));

  const std::size_t n = x.rows();
  const std::size_t d = model.d_z;
  const double inv_n = 1.0 / static_cast<double>(n);

  // Reconstruction: ∂recon/∂x̂ = (x - x̂) / (σ² n).
  Matrix g_xhat = x - p.dec.output;
  g_xhat *= std::exp(-model.decoder_log_var) * inv_n;
  nn::BackwardResult dec_back = nn::backward(model.decoder, model.decoder_spec, p.dec.tape, g_xhat);
  Matrix g_z = std::move(dec_back.input_grad);
  res.grads.decoder = std::move(dec_back.grads);

  Matrix g_mu(n, d), g_lv(n, d);
  const double scale = -inv_n;  // total = recon - mean(kl rows)

  const Matrix* p_means = nullptr;
  const Matrix* p_log_vars = nullptr;
  Matrix g_pmeans, g_plv, g_logits;
  if (const auto* c = std::get_if<ConditionalGaussianPrior>(&model.prior)) {
    p_means = &c->means;
    p_log_vars = &c->log_vars;
  } else if (const auto* g = std::get_if<GaussianMixturePrior>(&model.prior)) {
    p_means = &g->means;
    p_log_vars = &g->log_vars;
    g_logits = Matrix(1, g->n_components());
  }
  if (p_means) {
    g_pmeans = Matrix(p_means->rows(), d);
    g_plv = Matrix(p_means->rows(), d);
  }

  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = t.component[r];
    for (std::size_t j = 0; j < d; ++j) {
      const double qmu = p.q.mu(r, j);
      const double qlv = p.q.log_var(r, j);
      const double pmu = p_means ? (*p_means)(k, j) : 0.0;
      const double plv = p_log_vars ? (*p_log_vars)(k, j) : 0.0;
      const double inv_pvar = std::exp(-plv);
      const double diff = qmu - pmu;
      g_mu(r, j) += scale * diff * inv_pvar;
      g_lv(r, j) += scale * 0.5 * (std::exp(qlv - plv) - 1.0);
      if (p_means) {
        g_pmeans(k, j) += scale * (-diff * inv_pvar);
        g_plv(k, j) += scale * 0.5 * (1.0 - (std::exp(qlv) + diff * diff) * inv_pvar);
      }
    }
  }

  if (model.kind == ModelKind::vade) {
    // Sampled correction f(z) = log N_k*(z) - log p(z).
    const auto& prior = std::get<GaussianMixturePrior>(model.prior);
    const std::size_t kk = prior.n_components();
    std::vector<double> weights(kk);
    for (std::size_t k = 0; k < kk; ++k) weights[k] = std::exp(t.log_weights[k]);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t best = t.component[r];
      for (std::size_t k = 0; k < kk; ++k) {
        const double gamma = t.resp(r, k);
        const double coef = (k == best ? 1.0 : 0.0) - gamma;
        g_logits(0, k) += scale * -(gamma - weights[k]);
        if (coef == 0.0) continue;
        for (std::size_t j = 0; j < d; ++j) {
          const double inv_var = std::exp(-prior.log_vars(k, j));
          const double diff = p.z(r, j) - prior.means(k, j);
          // ∂ log N_k / ∂z = -diff/σ², ∂/∂μ = diff/σ², ∂/∂logσ² = -½ + ½ diff²/σ²
          g_z(r, j) += scale * coef * (-diff * inv_var);
          g_pmeans(k, j) += scale * coef * (diff * inv_var);
          g_plv(k, j) += scale * coef * (-0.5 + 0.5 * diff * diff * inv_var);
        }
      }
    }
  }

  // Pathwise derivative through z = μ + exp(logσ²/2) η.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < d; ++j) {
      g_mu(r, j) += g_z(r, j);
      g_lv(r, j) += g_z(r, j) * 0.5 * std::exp(0.5 * p.q.log_var(r, j)) * p.eta(r, j);
    }
  }
  nn::BackwardResult enc_back =
      nn::backward(model.encoder, model.encoder_spec, p.enc.tape, hconcat(g_mu, g_lv));
  res.grads.encoder = std::move(enc_back.grads);

  if (model.kind == ModelKind::ivae) {
    res.grads.prior.push_back(std::move(g_pmeans));
    res.grads.prior.push_back(std::move(g_plv));
  } else if (model.kind == ModelKind::vade) {
    res.grads.prior.push_back(std::move(g_logits));
    res.grads.prior.push_back(std::move(g_pmeans));
    res.grads.prior.push_back(std::move(g_plv));
  }
  return res;
}

}  // namespace latentid::models
