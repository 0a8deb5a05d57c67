#include "latentid/ndmath/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "latentid/error.hpp"

namespace latentid {

namespace {

// Hestenes one-sided Jacobi on a tall (rows >= cols) matrix.
SvdResult svd_tall(const Matrix& m, std::size_t max_sweeps) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  Matrix a = m;
  Matrix v = Matrix::identity(n);
  constexpr double kTol = 1e-15;

  std::size_t sweep = 0;
  bool rotated = true;
  while (rotated) {
    if (sweep == max_sweeps) throw ConvergenceError("svd: Jacobi sweeps did not converge", sweep);
    ++sweep;
    rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          alpha += ap * ap;
          beta += aq * aq;
          gamma += ap * aq;
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }

  std::vector<double> norms(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += a(i, j) * a(i, j);
    norms[j] = std::sqrt(acc);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return norms[x] > norms[y]; });

  SvdResult out{Matrix(rows, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n > 0 ? norms[order[0]] : 0.0;
  const double floor = std::max(smax, 1.0) * 1e-300;
  std::vector<bool> filled(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    out.s[k] = norms[j];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
    if (norms[j] > floor) {
      for (std::size_t i = 0; i < rows; ++i) out.u(i, k) = a(i, j) / norms[j];
      filled[k] = true;
    }
  }

  // Null directions: complete U with standard basis vectors orthogonalised
  // against the columns already present.
  std::size_t basis = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (filled[k]) continue;
    while (basis < rows) {
      std::vector<double> cand(rows, 0.0);
      cand[basis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < n; ++c) {
          if (!filled[c]) continue;
          double dot = 0.0;
          for (std::size_t i = 0; i < rows; ++i) dot += out.u(i, c) * cand[i];
          for (std::size_t i = 0; i < rows; ++i) cand[i] -= dot * out.u(i, c);
        }
      }
      double norm = 0.0;
      for (double x : cand) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.5) {
        for (std::size_t i = 0; i < rows; ++i) out.u(i, k) = cand[i] / norm;
        filled[k] = true;
        break;
      }
    }
  }
  return out;
}

}  // namespace

SvdResult svd(const Matrix& m, std::size_t max_sweeps) {
  if (!m.all_finite()) throw InvalidArgument("svd: matrix has non-finite entries");
  if (m.rows() >= m.cols()) return svd_tall(m, max_sweeps);
  SvdResult t = svd_tall(transpose(m), max_sweeps);
  return SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
}

double condition_number(const Matrix& m) {
  if (m.rows() != m.cols()) throw ShapeError("condition_number: matrix is not square");
  if (m.rows() == 0) throw InvalidArgument("condition_number: empty matrix");
  const SvdResult r = svd(m);
  const double smin = r.s.back();
  if (smin < 1e-300) return std::numeric_limits<double>::infinity();
  return r.s.front() / smin;
}

Matrix inverse_sqrt_spd(const Matrix& s) {
  if (s.rows() != s.cols()) throw ShapeError("inverse_sqrt_spd: matrix is not square");
  const SvdResult r = svd(s);
  const std::size_t n = s.rows();
  Matrix scaled = r.u;
  for (std::size_t k = 0; k < n; ++k) {
    if (!(r.s[k] > 0.0)) throw InvalidArgument("inverse_sqrt_spd: matrix is singular");
    const double f = 1.0 / std::sqrt(r.s[k]);
    for (std::size_t i = 0; i < n; ++i) scaled(i, k) *= f;
  }
  return matmul_nt(scaled, r.u);
}

}  // namespace latentid
