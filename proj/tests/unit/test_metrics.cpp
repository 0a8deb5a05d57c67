#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "../support/oracles.hpp"
#include "../support/published_mcc.hpp"
#include "latentid/error.hpp"
#include "latentid/metrics/correlation.hpp"
#include "latentid/metrics/hungarian.hpp"
#include "latentid/metrics/mcc.hpp"
#include "latentid/metrics/wilcoxon.hpp"
#include "latentid/ndmath/rng.hpp"

using namespace latentid;
using latentid::oracle::brute_force_min_cost;
using latentid::oracle::brute_force_wilcoxon_p;
using namespace latentid::metrics;

namespace {

double cov_formula(const Matrix& a, std::size_t i, const Matrix& b, std::size_t j) {
  const std::size_t n = a.rows();
  double ma = 0.0, mb = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    ma += a(r, i);
    mb += b(r, j);
  }
  ma /= n;
  mb /= n;
  double c = 0.0;
  for (std::size_t r = 0; r < n; ++r) c += (a(r, i) - ma) * (b(r, j) - mb);
  return c / (n - 1);
}

std::vector<double> to_vec(const Matrix& m) { return {m.values().begin(), m.values().end()}; }

std::vector<std::size_t> range(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v(hi - lo);
  std::iota(v.begin(), v.end(), lo);
  return v;
}

}  // namespace

TEST_CASE("pearson correlation matrix") {
  RngStream rng(1);
  const Matrix a = sample_gaussian(rng, 100, 3, 0.0, 1.0);
  const auto same = pearson_corr_matrix(a, a, false);
  for (std::size_t i = 0; i < 3; ++i) CHECK(same.values(i, i) == doctest::Approx(1.0).epsilon(1e-14));
  const auto neg = pearson_corr_matrix(a, -1.0 * a, true);
  for (std::size_t i = 0; i < 3; ++i) CHECK(neg.values(i, i) == doctest::Approx(1.0).epsilon(1e-14));
  for (double v : neg.values.values()) CHECK(v >= 0.0);

  const Matrix b = sample_gaussian(rng, 100, 3, 2.0, 3.0);
  const auto c = pearson_corr_matrix(a, b, false);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      const double oracle = cov_formula(a, i, b, j) / std::sqrt(cov_formula(a, i, a, i) * cov_formula(b, j, b, j));
      CHECK(std::abs(c.values(i, j) - oracle) <= 1e-12);
    }

  Matrix dead = a;
  for (std::size_t r = 0; r < 100; ++r) dead(r, 1) = 4.0;
  const auto z = pearson_corr_matrix(dead, a, true);
  for (std::size_t j = 0; j < 3; ++j) CHECK(z.values(1, j) == 0.0);
  CHECK_THROWS_AS(pearson_corr_matrix(a, Matrix(99, 3), true), ShapeError);
}

TEST_CASE("hungarian examples") {
  Matrix eye_cost(4, 4, 1.0);
  for (std::size_t i = 0; i < 4; ++i) eye_cost(i, i) = 0.0;
  const auto id = hungarian(eye_cost);
  for (const auto& [r, c] : id.pairs) CHECK(r == c);

  const Matrix m = Matrix::from_rows({{4, 1, 3}, {2, 0, 5}, {3, 2, 2}});
  const auto a = hungarian(m);
  REQUIRE(a.pairs.size() == 3);
  CHECK(a.pairs[0].second == 1);
  CHECK(a.pairs[1].second == 0);
  CHECK(a.pairs[2].second == 2);
  CHECK(a.total_score == 5.0);

  Matrix shifted = m;
  for (std::size_t c = 0; c < 3; ++c) shifted(1, c) += 10.0;
  CHECK(hungarian(shifted).pairs == a.pairs);
}

TEST_CASE("hungarian agrees with brute force") {
  RngStream rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t rows = 1 + rng.uniform_int(7), cols = 1 + rng.uniform_int(7);
    Matrix cost(rows, cols);
    const bool integer = trial % 2 == 0;
    for (double& v : cost.values()) v = integer ? static_cast<double>(rng.uniform_int(20)) : rng.uniform(-1, 1);
    const Assignment as = hungarian(cost);
    CHECK(as.pairs.size() == std::min(rows, cols));
    std::vector<char> used_r(rows, 0), used_c(cols, 0);
    double sum = 0.0;
    for (const auto& [r, c] : as.pairs) {
      CHECK_FALSE(used_r[r]);
      CHECK_FALSE(used_c[c]);
      used_r[r] = used_c[c] = 1;
      sum += cost(r, c);
    }
    CHECK(std::abs(sum - as.total_score) <= 1e-12);
    const double best = brute_force_min_cost(cost);
    if (integer) CHECK(as.total_score == best);
    else CHECK(std::abs(as.total_score - best) <= 1e-12);
  }
}

TEST_CASE("strong MCC") {
  RngStream rng(3);
  const Matrix ra = sample_gaussian(rng, 500, 5, 0.0, 1.0);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const std::vector<double> scale{-2.0, 0.5, 3.0, -0.1, 7.0};
  Matrix rb(500, 5);
  for (std::size_t r = 0; r < 500; ++r)
    for (std::size_t c = 0; c < 5; ++c) rb(r, c) = scale[c] * ra(r, perm[c]);
  const MccReport rep = strong_mcc(ra, rb);
  CHECK(std::abs(rep.final_mcc - 1.0) <= 1e-9);
  for (double v : strong_mcc(ra, ra).matched_corrs) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

  const Matrix big_a = sample_gaussian(rng, 5000, 5, 0.0, 1.0);
  const Matrix big_b = sample_gaussian(rng, 5000, 5, 0.0, 1.0);
  const MccReport null = strong_mcc(big_a, big_b);
  CHECK(null.final_mcc < 0.15);
  CHECK(std::abs(strong_mcc(big_b, big_a).final_mcc - null.final_mcc) <= 1e-9);

  REQUIRE(null.cumulative_means.size() == null.matched_corrs.size());
  CHECK(null.final_mcc == null.cumulative_means.back());
  for (std::size_t i = 0; i + 1 < null.cumulative_means.size(); ++i) {
    CHECK(null.matched_corrs[i] >= null.matched_corrs[i + 1]);
    CHECK(null.cumulative_means[i] >= null.cumulative_means[i + 1]);
  }
  for (double v : null.cumulative_means) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("strong MCC with a held-out half") {
  RngStream rng(4);
  const Matrix ra = sample_gaussian(rng, 400, 4, 0.0, 1.0);
  Matrix rb = ra + sample_gaussian(rng, 400, 4, 0.0, 0.3);
  const auto fit = range(0, 200), eval = range(200, 400);
  const MccSplitReport rep = strong_mcc_split(ra, rb, fit, eval);
  CHECK(rep.in_sample.in_sample);
  CHECK_FALSE(rep.out_of_sample.in_sample);
  CHECK(rep.out_of_sample.final_mcc > 0.9);
  CHECK_THROWS_AS(strong_mcc_split(ra, rb, fit, range(150, 250)), InvalidArgument);
}

TEST_CASE("CCA") {
  RngStream rng(5);
  const Matrix ra = sample_gaussian(rng, 300, 4, 0.0, 1.0);
  const CcaModel self = fit_cca(ra, ra, 4);
  for (double c : self.canonical_correlations) CHECK(std::abs(c - 1.0) <= 1e-6);

  const Matrix B = sample_gaussian(rng, 4, 4, 0.0, 1.0);
  Matrix rb = matmul(ra, B);
  add_row_broadcast(rb, Matrix::from_rows({{1.0, -2.0, 3.0, 0.5}}));
  const CcaModel aff = fit_cca(ra, rb, 4);
  for (double c : aff.canonical_correlations) CHECK(std::abs(c - 1.0) <= 1e-6);

  const Matrix x = sample_gaussian(rng, 500, 10, 0.0, 1.0);
  const Matrix y = sample_gaussian(rng, 500, 10, 0.0, 1.0);
  const CcaModel null = fit_cca(x, y, 10);
  CHECK(null.canonical_correlations[0] < 0.4);
  for (std::size_t k = 0; k + 1 < 10; ++k)
    CHECK(null.canonical_correlations[k] >= null.canonical_correlations[k + 1] - 1e-8);

  // Affine re-parameterisation of either side leaves canonical correlations unchanged.
  const Matrix noisy = x + sample_gaussian(rng, 500, 10, 0.0, 1.0);
  const CcaModel base = fit_cca(x, noisy, 6);
  const Matrix C = sample_gaussian(rng, 10, 10, 0.0, 1.0);
  Matrix moved = matmul(noisy, C);
  add_row_broadcast(moved, Matrix(1, 10, 5.0));
  const CcaModel re = fit_cca(matmul(x, transpose(C)), moved, 6);
  for (std::size_t k = 0; k < 6; ++k)
    CHECK(std::abs(base.canonical_correlations[k] - re.canonical_correlations[k]) <= 1e-6);

  CHECK_THROWS_AS(fit_cca(ra, ra, 5), InvalidArgument);
  CHECK_THROWS_AS(fit_cca(select_rows(ra, range(0, 5)), select_rows(ra, range(0, 5)), 4), InvalidArgument);
  CHECK(default_d_cca(5, 5) == 5);
  CHECK(default_d_cca(64, 50) == 20);
}

TEST_CASE("weak MCC") {
  RngStream rng(6);
  const Matrix ra = sample_gaussian(rng, 600, 5, 0.0, 1.0);
  Matrix rb = matmul(ra, sample_gaussian(rng, 5, 5, 0.0, 1.0));
  add_row_broadcast(rb, Matrix(1, 5, -1.0));
  const auto fit = range(0, 300), eval = range(300, 600);
  const MccSplitReport aff = weak_mcc(ra, rb, fit, eval, 5);
  CHECK(aff.in_sample.final_mcc >= 0.999);
  CHECK(aff.out_of_sample.final_mcc >= 0.99);

  const MccSplitReport same = weak_mcc(ra, rb + sample_gaussian(rng, 600, 5, 0.0, 1.0), fit, fit, 5);
  CHECK(same.in_sample.matched_corrs == same.out_of_sample.matched_corrs);

  double in = 0.0, out = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Matrix a = sample_gaussian(rng, 200, 8, 0.0, 1.0);
    const Matrix b = sample_gaussian(rng, 200, 8, 0.0, 1.0);
    const auto rep = weak_mcc(a, b, range(0, 100), range(100, 200), 8);
    in += rep.in_sample.final_mcc;
    out += rep.out_of_sample.final_mcc;
  }
  CHECK(out < in);
  CHECK_THROWS_AS(weak_mcc(ra, rb, fit, range(299, 400), 5), InvalidArgument);
}

TEST_CASE("report JSON") {
  const MccReport r = make_report({0.2, 0.9, 0.5}, false);
  CHECK(r.matched_corrs == std::vector<double>{0.9, 0.5, 0.2});
  const nlohmann::json j = r;
  const MccReport back = j.get<MccReport>();
  CHECK(back.matched_corrs == r.matched_corrs);
  CHECK(back.cumulative_means == r.cumulative_means);
  CHECK(back.final_mcc == r.final_mcc);
  CHECK_FALSE(back.in_sample);
}

TEST_CASE("wilcoxon on published MCC tables") {
  using namespace latentid::testdata;
  const auto iv_vd = wilcoxon_signed_rank(kIvaeMcc, kVadeMcc);
  CHECK(iv_vd.n_effective == 24);
  CHECK(iv_vd.method == WilcoxonMethod::exact);
  CHECK(std::abs(iv_vd.p_value - kIvaeVadeP) <= 0.005);
  const auto iv_va = wilcoxon_signed_rank(kIvaeMcc, kVaeMcc);
  CHECK(std::abs(iv_va.p_value - kIvaeVaeP) <= 0.005);
  CHECK(iv_va.ties);
  const auto va_vd = wilcoxon_signed_rank(kVaeMcc, kVadeMcc);
  CHECK(std::abs(va_vd.p_value - kVaeVadeP) <= 0.005);
  // Symmetric in its arguments.
  CHECK(wilcoxon_signed_rank(kVadeMcc, kIvaeMcc).p_value == iv_vd.p_value);
}

TEST_CASE("wilcoxon exact path matches enumeration") {
  RngStream rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 5 + rng.uniform_int(8);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      // Some instances get zero differences and tied magnitudes.
      b[i] = trial % 3 == 0 ? a[i] + static_cast<double>(rng.uniform_int(5)) - 2.0 : rng.normal();
    }
    bool all_zero = true;
    for (std::size_t i = 0; i < n; ++i) all_zero = all_zero && a[i] == b[i];
    if (all_zero) continue;
    const auto res = wilcoxon_signed_rank(a, b, WilcoxonMethod::exact);
    CHECK(res.p_value == brute_force_wilcoxon_p(a, b));
    CHECK((res.p_value >= 0.0 && res.p_value <= 1.0));
    CHECK(res.statistic >= 0.0);
  }
}

TEST_CASE("wilcoxon six-pair example") {
  RngStream rng(8);
  const Matrix a = sample_gaussian(rng, 6, 1, 0.0, 1.0), b = sample_gaussian(rng, 6, 1, 0.3, 1.0);
  const auto res = wilcoxon_signed_rank(to_vec(a), to_vec(b));
  CHECK(res.method == WilcoxonMethod::exact);
  CHECK(res.p_value == brute_force_wilcoxon_p(to_vec(a), to_vec(b)));
}

TEST_CASE("wilcoxon normal approximation tracks the exact p") {
  RngStream rng(9);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 15 + rng.uniform_int(11);
    const double shift = rng.uniform(0.0, 1.0);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal() + shift;
      b[i] = rng.normal();
    }
    const double pe = wilcoxon_signed_rank(a, b, WilcoxonMethod::exact).p_value;
    const auto normal = wilcoxon_signed_rank(a, b, WilcoxonMethod::normal);
    CHECK(normal.method == WilcoxonMethod::normal);
    worst = std::max(worst, std::abs(normal.p_value - pe));
  }
  CHECK(worst < 0.01);
}

TEST_CASE("wilcoxon edge cases") {
  const std::vector<double> a{1, 2, 3, 4, 5};
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), InvalidArgument);
  CHECK_THROWS_AS(wilcoxon_signed_rank(std::vector<double>{1, 2, 3, 4}, std::vector<double>{0, 0, 0, 0}),
                  InvalidArgument);
  CHECK_THROWS_AS(wilcoxon_signed_rank(a, std::vector<double>{1, 2}), ShapeError);
  const std::vector<double> b{1, 2, 3, 4, 6};
  const auto one = wilcoxon_signed_rank(a, b);
  CHECK(one.n_effective == 1);
  CHECK(one.p_value == 1.0);
  std::vector<double> big_a(40), big_b(40);
  for (int i = 0; i < 40; ++i) {
    big_a[i] = i;
    big_b[i] = i + (i % 2 ? 0.5 : -0.4) * (i + 1);
  }
  CHECK(wilcoxon_signed_rank(big_a, big_b).method == WilcoxonMethod::normal);
}

TEST_CASE("ELBO-MCC correlation") {
  const std::vector<double> e{-120.0, -100.0, -95.0, -130.0, -101.5};
  std::vector<double> m(5), r(5);
  for (int i = 0; i < 5; ++i) {
    m[i] = 0.002 * e[i] + 1.0;
    r[i] = -0.002 * e[i];
  }
  CHECK(elbo_mcc_correlation(e, m) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(elbo_mcc_correlation(e, r) == doctest::Approx(-1.0).epsilon(1e-14));
  RngStream rng(10);
  const Matrix x = sample_gaussian(rng, 30, 2, 0.0, 1.0);
  const Matrix c = pearson_corr_matrix(slice_cols(x, 0, 1), slice_cols(x, 1, 2), false).values;
  CHECK(std::abs(elbo_mcc_correlation(x.column(0), x.column(1)) - c(0, 0)) <= 1e-12);
  const double cov = cov_formula(x, 0, x, 1) / std::sqrt(cov_formula(x, 0, x, 0) * cov_formula(x, 1, x, 1));
  CHECK(std::abs(elbo_mcc_correlation(x.column(0), x.column(1)) - cov) <= 1e-12);
  CHECK_THROWS_AS(elbo_mcc_correlation(e, std::vector<double>(5, 0.3)), InvalidArgument);
  CHECK_THROWS_AS(elbo_mcc_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}), InvalidArgument);
}
