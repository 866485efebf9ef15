#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "thgcn/common.hpp"

namespace thgcn {

// splitmix64 finalizer; full-period bijective mixer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: draws are mix64(state + i * golden) for i = 1, 2, ...
// Streams are split by hashing labels/indices into the state, so adding a new
// consumer never perturbs the draws of existing streams.
class RngStream {
 public:
  RngStream() : RngStream(0, "root") {}
  RngStream(std::uint64_t seed, std::string_view label)
      : state_(mix64(mix64(seed) ^ fnv1a64(label))) {}

  RngStream child(std::string_view label) const {
    RngStream s;
    s.state_ = mix64(state_ ^ fnv1a64(label));
    return s;
  }

  RngStream child(std::string_view label, std::uint64_t index) const {
    RngStream s;
    s.state_ = mix64(mix64(state_ ^ fnv1a64(label)) + mix64(index));
    return s;
  }

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_ + counter_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n >= 1. Lemire's multiply-shift reduction.
  std::uint64_t uniform_int(std::uint64_t n) {
    unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; the second value of each pair is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 1.0 - uniform();  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t state_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Named top-level stream for a scenario seed: placement, mobility, traffic,
// training, shadowing each get independent deterministic streams.
inline RngStream rng_stream(std::uint64_t seed, std::string_view stream_id) {
  return RngStream(seed, stream_id);
}

}  // namespace thgcn
