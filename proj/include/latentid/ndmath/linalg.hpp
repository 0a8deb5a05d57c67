#pragma once

#include <cstddef>
#include <vector>

#include "latentid/ndmath/matrix.hpp"

namespace latentid {

/// Thin SVD m = U·diag(S)·Vᵀ with k = min(rows, cols) columns in U and V.
/// S is non-negative and descending.
struct SvdResult {
  Matrix u;
  std::vector<double> s;
  Matrix v;
};

/// One-sided Jacobi SVD. Throws ConvergenceError (carrying the sweep count)
/// if rotations are still being applied after `max_sweeps` sweeps.
SvdResult svd(const Matrix& m, std::size_t max_sweeps = 100);

/// σ_max / σ_min of a square matrix; +infinity when σ_min < 1e-300.
double condition_number(const Matrix& m);

/// S^(-1/2) for a symmetric positive-definite matrix, via its SVD.
Matrix inverse_sqrt_spd(const Matrix& s);

}  // namespace latentid
