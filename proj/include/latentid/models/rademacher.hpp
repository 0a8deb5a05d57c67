#pragma once

#include <cstddef>
#include <vector>

#include "latentid/ndmath/matrix.hpp"
#include "latentid/ndmath/rng.hpp"

namespace latentid::models {

/// Fixed ±1 random projection whose sign pattern indexes 2^bits components.
struct RademacherHasher {
  std::size_t bits = 0;
  Matrix projection;  // bits × d_x, entries exactly ±1

  std::size_t n_labels() const noexcept { return std::size_t{1} << bits; }
};

/// Entries are ±1 with probability ½ each. Requires 1 ≤ bits ≤ 20.
RademacherHasher build_rademacher_hasher(std::size_t bits, std::size_t d_x, RngStream& rng);

/// u = Σ_i 2^i·b_i with b_i = 1 when (A·x)_i ≥ 0, else 0.
std::vector<std::size_t> hash_u(const RademacherHasher& hasher, const Matrix& x);

}  // namespace latentid::models
