#include "latentid/ndmath/rng.hpp"

#include <cmath>
#include <numbers>

#include "latentid/error.hpp"

namespace latentid {

std::uint64_t RngStream::mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(seed ^ mix64(stream_id + kGamma))) {}

std::uint64_t RngStream::next_u64() noexcept {
  ++counter_;
  return mix64(key_ + counter_ * kGamma);
}

double RngStream::uniform() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) noexcept {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::uniform_int(std::uint64_t n) noexcept {
  // Rejection on the top of the range removes modulo bias.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

RngStream RngStream::derive(std::uint64_t sub_id) const noexcept {
  return RngStream(mix64(key_ ^ mix64(sub_id * kGamma + 1)), stream_id_);
}

Matrix sample_gaussian(RngStream& rng, std::size_t rows, std::size_t cols, double mean, double std) {
  if (!(std > 0.0)) throw InvalidArgument("sample_gaussian: std must be positive");
  Matrix out(rows, cols);
  for (double& v : out.values()) v = mean + std * rng.normal();
  return out;
}

Matrix sample_uniform(RngStream& rng, std::size_t rows, std::size_t cols, double lo, double hi) {
  if (!(lo < hi)) throw InvalidArgument("sample_uniform: require lo < hi");
  Matrix out(rows, cols);
  for (double& v : out.values()) {
    v = rng.uniform(lo, hi);
    // Rounding in lo + (hi - lo) * u can land exactly on hi.
    if (v >= hi) v = std::nextafter(hi, lo);
  }
  return out;
}

}  // namespace latentid
