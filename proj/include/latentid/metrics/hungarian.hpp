#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "latentid/ndmath/matrix.hpp"

namespace latentid::metrics {

/// Minimum-cost injective matching; `pairs` holds min(rows, cols) (row, col)
/// pairs sorted by row. `total_score` is the sum of the matched costs.
struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double total_score = 0.0;
};

/// Shortest-augmenting-path Hungarian method with potentials, O(n²m).
/// Rectangular inputs leave the surplus rows or columns unmatched.
Assignment hungarian(const Matrix& cost);

}  // namespace latentid::metrics
