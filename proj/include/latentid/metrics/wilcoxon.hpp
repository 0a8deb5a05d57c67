#pragma once

#include <cstddef>
#include <span>
#include <string>

#include <json.hpp>

namespace latentid::metrics {

enum class WilcoxonMethod { automatic, exact, normal };

std::string to_string(WilcoxonMethod m);

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double p_value = 1.0;    // two-sided
  std::size_t n_effective = 0;
  WilcoxonMethod method = WilcoxonMethod::exact;  // never `automatic` in a result
  bool ties = false;
};

/// Two-sided signed-rank test on d = a - b. Differences within 1e-9·max|d|
/// of zero are dropped, and |d| values within the same tolerance share a
/// mid-rank. `automatic` enumerates sign patterns when n_effective <= 25 and
/// otherwise uses the tie-corrected normal approximation with continuity
/// correction and an Edgeworth kurtosis term.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::automatic);

void to_json(nlohmann::json& j, const WilcoxonResult& r);

}  // namespace latentid::metrics
