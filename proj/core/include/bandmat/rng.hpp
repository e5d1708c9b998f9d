// Copyright (c) 2026 the bandmat authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "bandmat/types.hpp"

// Counter-based random streams (Philox4x32-10, Salmon et al., SC'11).
//
// Every random number in a run is addressed by (seed, stream id, draw
// counter). A stream id encodes (draw index, retry attempt, substream):
// samplers give each matrix block its own substream, estimators give each
// Monte Carlo draw its own draw index. Workers can therefore be assigned
// arbitrary draw ranges and still reproduce the serial run bit for bit.

namespace bandmat {

namespace philox {

constexpr uint32_t kMul0 = 0xD2511F53u;
constexpr uint32_t kMul1 = 0xCD9E8D57u;
constexpr uint32_t kBump0 = 0x9E3779B9u;
constexpr uint32_t kBump1 = 0xBB67AE85u;

inline std::array<uint32_t, 4> block(std::array<uint32_t, 2> key,
                                     std::array<uint32_t, 4> ctr) {
  for (int round = 0; round < 10; ++round) {
    const uint64_t p0 = uint64_t(kMul0) * ctr[0];
    const uint64_t p1 = uint64_t(kMul1) * ctr[2];
    ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
           uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
    key[0] += kBump0;
    key[1] += kBump1;
  }
  return ctr;
}

}  // namespace philox

/// One keyed random stream: (seed, stream_id) fixes the whole sequence.
class RngStream {
 public:
  RngStream(uint64_t seed, uint64_t stream_id)
      : key_{uint32_t(seed), uint32_t(seed >> 32)},
        hi_{uint32_t(stream_id), uint32_t(stream_id >> 32)} {}

  uint64_t next_u64() {
    if (pos_ == 2) refill();
    return buf_[pos_++];
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1]; safe as a log/tangent argument.
  double uniform_open() { return 1.0 - uniform01(); }

  /// Standard normal via Box-Muller; consumes uniforms in fixed pairs.
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform01();
    const double rho = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    cached_ = rho * std::sin(ang);
    have_cached_ = true;
    return rho * std::cos(ang);
  }

  /// Complex Gaussian with E z = 0 and E |z|^2 = 1.
  Complex complex_normal() {
    const double x = normal();
    const double y = normal();
    return {x * std::numbers::sqrt2 / 2.0, y * std::numbers::sqrt2 / 2.0};
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard Cauchy.
  double cauchy() {
    return std::tan(std::numbers::pi * (uniform01() - 0.5));
  }

  /// Gamma(shape, 1) by Marsaglia-Tsang; for shape < 1 boosts from
  /// shape + 1. Consumes a variable number of uniforms (rejection), which
  /// is fine because each stream is privately keyed.
  double gamma(double shape) {
    if (shape < 1.0) {
      const double u = uniform_open();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_open();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  void refill() {
    const auto out = philox::block(key_, {ctr_lo_, ctr_hi_, hi_[0], hi_[1]});
    if (++ctr_lo_ == 0) ++ctr_hi_;
    buf_[0] = (uint64_t(out[0]) << 32) | out[1];
    buf_[1] = (uint64_t(out[2]) << 32) | out[3];
    pos_ = 0;
  }

  std::array<uint32_t, 2> key_;
  std::array<uint32_t, 2> hi_;
  uint32_t ctr_lo_ = 0, ctr_hi_ = 0;
  std::array<uint64_t, 2> buf_{};
  int pos_ = 2;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/// Identifies the random streams of one matrix draw. Layout of the stream
/// id: draw index in the high 32 bits, retry attempt in bits 24..31,
/// substream (block index) in bits 0..23.
struct DrawStream {
  uint64_t seed = 0;
  uint64_t draw = 0;
  uint32_t attempt = 0;

  static constexpr uint32_t kMaxSubstream = 1u << 24;

  RngStream substream(uint32_t index) const {
    if (draw >> 32 || attempt > 0xffu || index >= kMaxSubstream)
      throw std::out_of_range("DrawStream: stream coordinates exceed layout");
    const uint64_t id = (draw << 32) | (uint64_t(attempt) << 24) | index;
    return RngStream(seed, id);
  }
};

/// A family of draw streams for a Monte Carlo run. `first_draw` offsets the
/// draw index so that composite estimators can hand disjoint draw ranges to
/// their sub-estimates.
struct McStream {
  uint64_t seed = 0;
  uint64_t first_draw = 0;

  DrawStream draw(uint64_t i, uint32_t attempt = 0) const {
    return {seed, first_draw + i, attempt};
  }
  McStream offset(uint64_t by) const { return {seed, first_draw + by}; }
};

}  // namespace bandmat
