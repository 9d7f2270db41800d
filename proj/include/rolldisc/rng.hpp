#pragma once

// Deterministic random streams: xoshiro256++ seeded through SplitMix64 from
// a (seed, stream) pair, with Box-Muller normals computed by the lane-generic
// routines in simd/vmath.hpp so batched kernels reproduce them exactly.

#include "rolldisc/simd/vmath.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

namespace rolldisc {

inline constexpr std::string_view kRngName = "xoshiro256++/splitmix64-seed/box-muller";
inline constexpr int kRngVersion = 1;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  Xoshiro256pp() : Xoshiro256pp(0, 0) {}

  /// Independent stream `stream` of master seed `seed`.
  Xoshiro256pp(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t a = seed;
    std::uint64_t b = stream ^ 0xD1B54A32D192ED03ull;
    std::uint64_t mix = splitmix64(a) ^ (splitmix64(b) * 0x9E3779B97F4A7C15ull);
    for (auto& w : s_) w = splitmix64(mix);
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() { return simd::xoshiro_next(s_[0], s_[1], s_[2], s_[3]); }

  const std::array<std::uint64_t, 4>& state() const { return s_; }
  std::array<std::uint64_t, 4>& state() { return s_; }

  friend bool operator==(const Xoshiro256pp&, const Xoshiro256pp&) = default;

 private:
  std::array<std::uint64_t, 4> s_{};
};

/// Standard normal stream. Normals come in Box-Muller pairs; the second of
/// each pair is cached so the sequence does not depend on how callers chunk
/// their requests.
class Rng {
 public:
  Rng() = default;
  Rng(std::uint64_t seed, std::uint64_t stream) : engine_(seed, stream) {}

  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const std::uint64_t r1 = engine_();
    const std::uint64_t r2 = engine_();
    double z0, z1;
    simd::box_muller<double>(r1, r2, z0, z1);
    cached_ = z1;
    has_cached_ = true;
    return z0;
  }

  void fill_normal(std::span<double> out) {
    for (double& v : out) v = normal();
  }

  /// Uniform in [0, 1).
  double uniform() { return simd::unit_interval_1_2(engine_()) - 1.0; }

  Xoshiro256pp& engine() { return engine_; }
  const Xoshiro256pp& engine() const { return engine_; }
  bool has_cached() const { return has_cached_; }
  double cached() const { return cached_; }
  void set_cache(bool has, double value) {
    has_cached_ = has;
    cached_ = value;
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  Xoshiro256pp engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace rolldisc
