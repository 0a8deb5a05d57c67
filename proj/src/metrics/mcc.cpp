#include "latentid/metrics/mcc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "latentid/error.hpp"
#include "latentid/metrics/correlation.hpp"
#include "latentid/metrics/hungarian.hpp"
#include "latentid/ndmath/linalg.hpp"

namespace latentid::metrics {

MccReport make_report(std::vector<double> corrs, bool in_sample) {
  MccReport r;
  r.in_sample = in_sample;
  std::sort(corrs.begin(), corrs.end(), std::greater<>());
  r.matched_corrs = std::move(corrs);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.matched_corrs.size(); ++i) {
    acc += r.matched_corrs[i];
    r.cumulative_means.push_back(acc / static_cast<double>(i + 1));
  }
  r.final_mcc = r.cumulative_means.empty() ? 0.0 : r.cumulative_means.back();
  return r;
}

namespace {

void check_pair(const Matrix& ra, const Matrix& rb) {
  if (ra.rows() != rb.rows()) throw ShapeError("mcc: representations have different row counts");
  if (ra.cols() == 0 || rb.cols() == 0) throw ShapeError("mcc: representations have no columns");
}

void check_subsets(std::span<const std::size_t> fit_rows, std::span<const std::size_t> eval_rows,
                   std::size_t n) {
  std::set<std::size_t> fit(fit_rows.begin(), fit_rows.end());
  for (std::size_t r : fit_rows)
    if (r >= n) throw InvalidArgument("mcc: fit row index out of range");
  for (std::size_t r : eval_rows) {
    if (r >= n) throw InvalidArgument("mcc: eval row index out of range");
    if (fit.count(r)) throw InvalidArgument("mcc: fit and eval rows must be disjoint");
  }
}

Assignment align(const CorrelationMatrix& c) {
  Matrix cost = c.values;
  for (double& v : cost.values()) v = 1.0 - v;
  return hungarian(cost);
}

std::vector<double> matched(const CorrelationMatrix& c, const Assignment& a) {
  std::vector<double> out;
  out.reserve(a.pairs.size());
  for (const auto& [i, j] : a.pairs) out.push_back(c.values(i, j));
  return out;
}

// |ρ| between column k of a and column k of b.
std::vector<double> paired_corrs(const Matrix& a, const Matrix& b) {
  const CorrelationMatrix c = pearson_corr_matrix(a, b, true);
  std::vector<double> out(a.cols());
  for (std::size_t k = 0; k < a.cols(); ++k) out[k] = c.values(k, k);
  return out;
}

Matrix centred(const Matrix& m, const Matrix& mean) {
  Matrix out = m;
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) -= mean(0, c);
  return out;
}

Matrix covariance(const Matrix& xa, const Matrix& xb) {
  Matrix c = matmul_tn(xa, xb);
  c *= 1.0 / static_cast<double>(xa.rows() - 1);
  return c;
}

}  // namespace

MccReport strong_mcc(const Matrix& ra, const Matrix& rb) {
  check_pair(ra, rb);
  const CorrelationMatrix c = pearson_corr_matrix(ra, rb, true);
  return make_report(matched(c, align(c)), true);
}

MccSplitReport strong_mcc_split(const Matrix& ra, const Matrix& rb,
                                std::span<const std::size_t> fit_rows,
                                std::span<const std::size_t> eval_rows) {
  check_pair(ra, rb);
  check_subsets(fit_rows, eval_rows, ra.rows());
  const CorrelationMatrix fit = pearson_corr_matrix(select_rows(ra, fit_rows), select_rows(rb, fit_rows), true);
  const Assignment a = align(fit);
  const CorrelationMatrix eval =
      pearson_corr_matrix(select_rows(ra, eval_rows), select_rows(rb, eval_rows), true);
  return {make_report(matched(fit, a), true), make_report(matched(eval, a), false)};
}

std::size_t default_d_cca(std::size_t d_a, std::size_t d_b) {
  return std::min<std::size_t>({20, d_a, d_b});
}

Matrix CcaModel::transform_a(const Matrix& ra) const {
  if (ra.cols() != mean_a.cols()) throw ShapeError("cca: input has the wrong width");
  return matmul(centred(ra, mean_a), projection_a);
}

Matrix CcaModel::transform_b(const Matrix& rb) const {
  if (rb.cols() != mean_b.cols()) throw ShapeError("cca: input has the wrong width");
  return matmul(centred(rb, mean_b), projection_b);
}

CcaModel fit_cca(const Matrix& ra, const Matrix& rb, std::size_t d_cca, double ridge) {
  check_pair(ra, rb);
  if (d_cca == 0 || d_cca > std::min(ra.cols(), rb.cols()))
    throw InvalidArgument("fit_cca: d_cca must lie in [1, min(d_a, d_b)]");
  if (ra.rows() < d_cca + 2) throw InvalidArgument("fit_cca: need at least d_cca + 2 rows");
  if (!(ridge >= 0.0)) throw InvalidArgument("fit_cca: ridge must be non-negative");

  CcaModel m;
  m.d_cca = d_cca;
  m.mean_a = column_means(ra);
  m.mean_b = column_means(rb);
  const Matrix xa = centred(ra, m.mean_a);
  const Matrix xb = centred(rb, m.mean_b);
  Matrix caa = covariance(xa, xa);
  Matrix cbb = covariance(xb, xb);
  for (std::size_t i = 0; i < caa.rows(); ++i) caa(i, i) += ridge;
  for (std::size_t i = 0; i < cbb.rows(); ++i) cbb(i, i) += ridge;
  const Matrix wa = inverse_sqrt_spd(caa);
  const Matrix wb = inverse_sqrt_spd(cbb);
  const SvdResult t = svd(matmul(matmul(wa, covariance(xa, xb)), wb));

  m.projection_a = matmul(wa, slice_cols(t.u, 0, d_cca));
  m.projection_b = matmul(wb, slice_cols(t.v, 0, d_cca));
  for (std::size_t k = 0; k < d_cca; ++k)
    m.canonical_correlations.push_back(std::clamp(t.s[k], 0.0, 1.0));
  return m;
}

MccSplitReport weak_mcc(const Matrix& ra, const Matrix& rb, std::span<const std::size_t> fit_rows,
                        std::span<const std::size_t> eval_rows, std::size_t d_cca, double ridge) {
  check_pair(ra, rb);
  // Scoring the fit rows against themselves is the in-sample == out-of-sample sanity case.
  const bool same = std::equal(fit_rows.begin(), fit_rows.end(), eval_rows.begin(), eval_rows.end());
  if (!same) check_subsets(fit_rows, eval_rows, ra.rows());
  const Matrix fa = select_rows(ra, fit_rows);
  const Matrix fb = select_rows(rb, fit_rows);
  const CcaModel cca = fit_cca(fa, fb, d_cca, ridge);
  const Matrix ea = select_rows(ra, eval_rows);
  const Matrix eb = select_rows(rb, eval_rows);
  return {make_report(paired_corrs(cca.transform_a(fa), cca.transform_b(fb)), true),
          make_report(paired_corrs(cca.transform_a(ea), cca.transform_b(eb)), false)};
}

void to_json(nlohmann::json& j, const MccReport& r) {
  j = {{"matched_corrs", r.matched_corrs},
       {"cumulative_means", r.cumulative_means},
       {"final_mcc", r.final_mcc},
       {"in_sample", r.in_sample}};
}

void from_json(const nlohmann::json& j, MccReport& r) {
  j.at("matched_corrs").get_to(r.matched_corrs);
  j.at("cumulative_means").get_to(r.cumulative_means);
  j.at("final_mcc").get_to(r.final_mcc);
  j.at("in_sample").get_to(r.in_sample);
}

void to_json(nlohmann::json& j, const MccSplitReport& r) {
  j = {{"in_sample", r.in_sample}, {"out_of_sample", r.out_of_sample}};
}

void from_json(const nlohmann::json& j, MccSplitReport& r) {
  j.at("in_sample").get_to(r.in_sample);
  j.at("out_of_sample").get_to(r.out_of_sample);
}

}  // namespace latentid::metrics
