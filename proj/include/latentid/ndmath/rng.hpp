#pragma once

#include <cstddef>
#include <cstdint>

#include "latentid/ndmath/matrix.hpp"

namespace latentid {

/// Counter-based 64-bit generator. Output i of stream (seed, stream_id) is
/// mix64(key + (i + 1) * kGamma) with key = mix64(seed ^ mix64(stream_id + kGamma)),
/// where mix64 is the SplitMix64 finaliser (constants 0xbf58476d1ce4e5b9 and
/// 0x94d049bb133111eb, shifts 30/27/31) and kGamma = 0x9e3779b97f4a7c15.
/// Only integer arithmetic is involved, so streams are bit-identical across
/// platforms.
class RngStream {
 public:
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ULL;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) noexcept;
  /// Standard normal via Box-Muller; consumes exactly two draws.
  double normal() noexcept;
  /// Uniform integer on [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) noexcept;

  /// Independent child stream keyed by this stream's identity and `sub_id`.
  /// Does not advance this stream.
  RngStream derive(std::uint64_t sub_id) const noexcept;

  static std::uint64_t mix64(std::uint64_t z) noexcept;

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// rows × cols i.i.d. N(mean, std²). Throws InvalidArgument when std ≤ 0.
Matrix sample_gaussian(RngStream& rng, std::size_t rows, std::size_t cols, double mean, double std);
/// rows × cols i.i.d. U[lo, hi). Throws InvalidArgument when lo ≥ hi.
Matrix sample_uniform(RngStream& rng, std::size_t rows, std::size_t cols, double lo, double hi);

}  // namespace latentid
