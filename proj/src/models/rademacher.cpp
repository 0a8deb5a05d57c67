#include "latentid/models/rademacher.hpp"

#include "latentid/error.hpp"

namespace latentid::models {

RademacherHasher build_rademacher_hasher(std::size_t bits, std::size_t d_x, RngStream& rng) {
  if (bits < 1 || bits > 20) throw InvalidArgument("rademacher hasher: bits must lie in [1, 20]");
  if (d_x == 0) throw InvalidArgument("rademacher hasher: d_x must be positive");
  RademacherHasher h{bits, Matrix(bits, d_x)};
  for (double& v : h.projection.values()) v = (rng.next_u64() >> 63) ? 1.0 : -1.0;
  return h;
}

std::vector<std::size_t> hash_u(const RademacherHasher& hasher, const Matrix& x) {
  if (x.cols() != hasher.projection.cols()) throw ShapeError("hash_u: x has the wrong number of columns");
  const Matrix h = matmul_nt(x, hasher.projection);  // n × bits
  std::vector<std::size_t> out(x.rows(), 0);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    std::size_t code = 0;
    for (std::size_t i = 0; i < hasher.bits; ++i)
      if (h(r, i) >= 0.0) code |= std::size_t{1} << i;
    out[r] = code;
  }
  return out;
}

}  // namespace latentid::models
