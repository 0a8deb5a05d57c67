#pragma once

#include <span>

#include "latentid/ndmath/matrix.hpp"

namespace latentid::metrics {

/// Pearson correlations between the columns of two representation sets.
struct CorrelationMatrix {
  Matrix values;  // d_a × d_b
  bool absolute = false;
};

/// Columns whose sample variance is below 1e-12 correlate as 0 with
/// everything. Requires a.rows() == b.rows() >= 3.
CorrelationMatrix pearson_corr_matrix(const Matrix& a, const Matrix& b, bool absolute);

/// Pearson correlation of two equal-length vectors (length >= 3). Throws
/// InvalidArgument when either has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);

/// Correlation between per-restart ELBOs and per-restart MCC to the sources.
double elbo_mcc_correlation(std::span<const double> elbos, std::span<const double> mccs);

}  // namespace latentid::metrics
