#pragma once

// Slow reference implementations shared by the unit tests and the
// acceptance runner. None of them call into the code they check, except the
// finite-difference helper, which only evaluates the ELBO value.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <vector>

#include "latentid/models/elbo.hpp"
#include "latentid/models/model.hpp"
#include "latentid/ndmath/matrix.hpp"

namespace latentid::oracle {

/// Minimum assignment cost by enumerating every permutation.
inline double brute_force_min_cost(const Matrix& cost) {
  const bool flip = cost.rows() > cost.cols();
  const Matrix c = flip ? transpose(cost) : cost;
  std::vector<std::size_t> perm(c.cols());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t r = 0; r < c.rows(); ++r) s += c(r, perm[r]);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Two-sided signed-rank p-value: quadratic mid-ranks and explicit
/// enumeration of every sign pattern.
inline double brute_force_wilcoxon_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i] - b[i]));
  const double tol = 1e-9 * scale;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::abs(a[i] - b[i]) > tol) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double below = 0, same = 0;
    for (std::size_t j = 0; j < n; ++j) {
      const double diff = std::abs(d[j]) - std::abs(d[i]);
      if (std::abs(diff) <= tol) ++same;
      else if (diff < 0) ++below;
    }
    rank[i] = below + (same + 1) / 2.0;
  }
  double wp = 0.0, total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += rank[i];
    if (d[i] > 0) wp += rank[i];
  }
  const double w = std::min(wp, total - wp);
  std::uint64_t count = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) s += rank[i];
    if (s <= w + 1e-9) ++count;
  }
  return std::min(1.0, 2.0 * static_cast<double>(count) / static_cast<double>(std::uint64_t{1} << n));
}

/// log Σ_k π_k N(z; μ_k, diag σ²_k), evaluated term by term.
inline double log_gmm(const models::GaussianMixturePrior& g, std::span<const double> z) {
  const auto lw = g.log_weights();
  double total = 0.0;
  for (std::size_t k = 0; k < g.n_components(); ++k) {
    double dens = 1.0;
    for (std::size_t j = 0; j < z.size(); ++j) {
      const double var = std::exp(g.log_vars(k, j));
      dens *= std::exp(-0.5 * (z[j] - g.means(k, j)) * (z[j] - g.means(k, j)) / var) /
              std::sqrt(2.0 * std::numbers::pi * var);
    }
    total += std::exp(lw[k]) * dens;
  }
  return std::log(total);
}

struct FdStats {
  std::size_t checked = 0;
  double worst = 0.0;
};

/// Central differences of the ELBO total over every parameter coordinate,
/// replaying the same noise for each evaluation. Relative error uses
/// max(|fd|, |analytic|, 1e-3) as denominator.
inline FdStats finite_difference_check(models::GenerativeModel model, const Matrix& x, models::LabelSpan u,
                                       bool train_mode, double h = 1e-5) {
  const RngStream base(1234);
  RngStream r = base;
  const models::ElboWithGradients ew = models::elbo_with_gradients(model, x, u, r, train_mode);
  const std::vector<Matrix> grads = ew.grads.flatten();
  std::vector<Matrix*> params = model.parameters();
  auto eval = [&] {
    model.touch();
    RngStream rr = base;
    return models::elbo(model, x, u, rr, train_mode).total;
  };
  FdStats st;
  if (params.size() != grads.size()) {
    st.worst = std::numeric_limits<double>::infinity();
    return st;
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i]->size(); ++k) {
      double& v = params[i]->values()[k];
      const double orig = v;
      v = orig + h;
      const double up = eval();
      v = orig - h;
      const double down = eval();
      v = orig;
      const double fd = (up - down) / (2 * h);
      const double an = grads[i].values()[k];
      const double denom = std::max({std::abs(fd), std::abs(an), 1e-3});
      st.worst = std::max(st.worst, std::abs(fd - an) / denom);
      ++st.checked;
    }
  }
  return st;
}

}  // namespace latentid::oracle
