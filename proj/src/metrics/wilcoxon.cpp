#include "latentid/metrics/wilcoxon.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "latentid/error.hpp"

namespace latentid::metrics {

namespace {

constexpr std::size_t kExactLimit = 25;
constexpr double kRelativeTolerance = 1e-9;

struct SignedRanks {
  std::vector<std::uint32_t> doubled;  // 2 × mid-rank, so ties stay integral
  std::vector<bool> positive;
  bool ties = false;
};

SignedRanks rank_differences(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d(a.size());
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d[i] = a[i] - b[i];
    scale = std::max(scale, std::abs(d[i]));
  }
  if (!std::isfinite(scale)) throw InvalidArgument("wilcoxon: inputs must be finite");
  if (scale == 0.0) throw InvalidArgument("wilcoxon: all differences are zero");
  const double tol = kRelativeTolerance * scale;

  std::vector<double> nz;
  for (double v : d)
    if (std::abs(v) > tol) nz.push_back(v);
  std::sort(nz.begin(), nz.end(), [](double x, double y) { return std::abs(x) < std::abs(y); });

  SignedRanks out;
  out.doubled.resize(nz.size());
  out.positive.resize(nz.size());
  for (std::size_t i = 0; i < nz.size();) {
    std::size_t j = i;
    while (j + 1 < nz.size() && std::abs(nz[j + 1]) - std::abs(nz[i]) <= tol) ++j;
    if (j > i) out.ties = true;
    // Positions i..j hold ranks i+1..j+1; their doubled mid-rank is i + j + 2.
    for (std::size_t k = i; k <= j; ++k) {
      out.doubled[k] = static_cast<std::uint32_t>(i + j + 2);
      out.positive[k] = nz[k] > 0.0;
    }
    i = j + 1;
  }
  return out;
}

// P(T <= w2) doubled, under random signs, by counting subset sums.
double exact_p(const std::vector<std::uint32_t>& doubled, std::uint64_t w2) {
  std::uint64_t total2 = 0;
  for (auto r : doubled) total2 += r;
  std::vector<std::uint64_t> counts(total2 + 1, 0);
  counts[0] = 1;
  std::uint64_t reach = 0;
  for (auto r : doubled) {
    reach += r;
    for (std::uint64_t s = reach; s >= r; --s) counts[s] += counts[s - r];
  }
  std::uint64_t below = 0;
  for (std::uint64_t s = 0; s <= std::min(w2, total2); ++s) below += counts[s];
  const double p = 2.0 * static_cast<double>(below) / std::ldexp(1.0, static_cast<int>(doubled.size()));
  return std::min(1.0, p);
}

double normal_p(const std::vector<std::uint32_t>& doubled, double w) {
  const double n = static_cast<double>(doubled.size());
  double s2 = 0.0, s4 = 0.0;
  for (auto r2 : doubled) {
    const double r = 0.5 * r2;
    s2 += r * r;
    s4 += r * r * r * r;
  }
  const double mean = n * (n + 1.0) / 4.0;
  const double sd = std::sqrt(s2 / 4.0);
  const double gamma2 = -2.0 * s4 / (s2 * s2);
  const double z = std::min(0.0, (w + 0.5 - mean) / sd);
  const double phi = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
  const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  const double f = cdf - phi * gamma2 / 24.0 * (z * z * z - 3.0 * z);
  return std::clamp(2.0 * f, 0.0, 1.0);
}

}  // namespace

std::string to_string(WilcoxonMethod m) {
  switch (m) {
    case WilcoxonMethod::automatic: return "automatic";
    case WilcoxonMethod::exact: return "exact";
    case WilcoxonMethod::normal: return "normal";
  }
  return "unknown";
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw ShapeError("wilcoxon: samples have different lengths");
  if (a.size() < 5) throw InvalidArgument("wilcoxon: need at least 5 pairs");
  const SignedRanks ranks = rank_differences(a, b);

  std::uint64_t plus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < ranks.doubled.size(); ++i) {
    total2 += ranks.doubled[i];
    if (ranks.positive[i]) plus2 += ranks.doubled[i];
  }
  const std::uint64_t w2 = std::min(plus2, total2 - plus2);

  WilcoxonResult res;
  res.n_effective = ranks.doubled.size();
  res.statistic = 0.5 * static_cast<double>(w2);
  res.ties = ranks.ties;
  if (method == WilcoxonMethod::automatic)
    method = res.n_effective <= kExactLimit ? WilcoxonMethod::exact : WilcoxonMethod::normal;
  if (method == WilcoxonMethod::exact && res.n_effective > 62)
    throw InvalidArgument("wilcoxon: exact enumeration is limited to 62 differences");
  res.method = method;
  res.p_value = method == WilcoxonMethod::exact ? exact_p(ranks.doubled, w2)
                                                : normal_p(ranks.doubled, res.statistic);
  return res;
}

void to_json(nlohmann::json& j, const WilcoxonResult& r) {
  j = {{"statistic", r.statistic},
       {"p_value", r.p_value},
       {"n_effective", r.n_effective},
       {"method", to_string(r.method)},
       {"ties", r.ties}};
}

}  // namespace latentid::metrics
