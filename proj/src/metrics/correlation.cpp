#include "latentid/metrics/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "latentid/error.hpp"

namespace latentid::metrics {

namespace {

constexpr double kMinVariance = 1e-12;

// Centred columns scaled to unit norm; all-zero for degenerate columns.
Matrix normalized_columns(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix out = m;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      out(r, c) = m(r, c) - mean;
      ss += out(r, c) * out(r, c);
    }
    const double var = ss / static_cast<double>(n - 1);
    const double scale = var < kMinVariance ? 0.0 : 1.0 / std::sqrt(ss);
    for (std::size_t r = 0; r < n; ++r) out(r, c) *= scale;
  }
  return out;
}

}  // namespace

CorrelationMatrix pearson_corr_matrix(const Matrix& a, const Matrix& b, bool absolute) {
  if (a.rows() != b.rows()) throw ShapeError("pearson_corr_matrix: row counts differ");
  if (a.rows() < 3) throw InvalidArgument("pearson_corr_matrix: need at least 3 rows");
  CorrelationMatrix out{matmul_tn(normalized_columns(a), normalized_columns(b)), absolute};
  for (double& v : out.values.values()) {
    v = std::clamp(v, -1.0, 1.0);
    if (absolute) v = std::abs(v);
  }
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("pearson: lengths differ");
  if (x.size() < 3) throw InvalidArgument("pearson: need at least 3 values");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx / (n - 1) < kMinVariance || syy / (n - 1) < kMinVariance)
    throw InvalidArgument("pearson: zero variance input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double elbo_mcc_correlation(std::span<const double> elbos, std::span<const double> mccs) {
  return pearson(elbos, mccs);
}

}  // namespace latentid::metrics
