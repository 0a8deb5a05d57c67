#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "latentid/ndmath/matrix.hpp"

namespace latentid::metrics {

/// Matched |ρ| per dimension, sorted descending, with running means.
struct MccReport {
  std::vector<double> matched_corrs;
  std::vector<double> cumulative_means;
  double final_mcc = 0.0;
  bool in_sample = true;
};

/// Sorts `corrs` descending and fills the cumulative curve.
MccReport make_report(std::vector<double> corrs, bool in_sample);

struct MccSplitReport {
  MccReport in_sample;
  MccReport out_of_sample;
};

/// Hungarian alignment on cost 1 - |ρ| over all rows.
MccReport strong_mcc(const Matrix& ra, const Matrix& rb);

/// Permutation chosen on `fit_rows`, then scored on `fit_rows` and `eval_rows`.
MccSplitReport strong_mcc_split(const Matrix& ra, const Matrix& rb,
                                std::span<const std::size_t> fit_rows,
                                std::span<const std::size_t> eval_rows);

/// Canonical variates: (r - mean) · projection, d_cca columns per side.
struct CcaModel {
  std::size_t d_cca = 0;
  Matrix mean_a;        // 1 × d_a
  Matrix mean_b;        // 1 × d_b
  Matrix projection_a;  // d_a × d_cca
  Matrix projection_b;  // d_b × d_cca
  std::vector<double> canonical_correlations;

  Matrix transform_a(const Matrix& ra) const;
  Matrix transform_b(const Matrix& rb) const;
};

constexpr double kDefaultCcaRidge = 1e-7;

/// min(20, d_a, d_b).
std::size_t default_d_cca(std::size_t d_a, std::size_t d_b);

/// Whitening with ridge-regularised covariances, then SVD of the whitened
/// cross-covariance.
CcaModel fit_cca(const Matrix& ra, const Matrix& rb, std::size_t d_cca,
                 double ridge = kDefaultCcaRidge);

/// CCA fitted on `fit_rows`; canonical pairs scored directly on both subsets.
MccSplitReport weak_mcc(const Matrix& ra, const Matrix& rb, std::span<const std::size_t> fit_rows,
                        std::span<const std::size_t> eval_rows, std::size_t d_cca,
                        double ridge = kDefaultCcaRidge);

void to_json(nlohmann::json& j, const MccReport& r);
void from_json(const nlohmann::json& j, MccReport& r);
void to_json(nlohmann::json& j, const MccSplitReport& r);
void from_json(const nlohmann::json& j, MccSplitReport& r);

}  // namespace latentid::metrics
