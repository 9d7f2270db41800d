#pragma once

// Lane-generic elementary functions. Every routine is written once as a
// template over the lane type V (double, or F64x4 in the AVX2 translation
// unit) so that the scalar reference and the vector variant execute the same
// IEEE operations in the same order and therefore agree bit for bit.
//
// Only +, -, *, /, sqrt and exact bit manipulation are used; no FMA.

#include <bit>
#include <cmath>
#include <cstdint>

namespace rolldisc::simd {

// ---- scalar lane primitives ---------------------------------------------

inline double select(bool m, double a, double b) { return m ? a : b; }
// Baseline x86-64 has no roundsd, and std::floor would be a libm call.
inline double vfloor(double x) {
  constexpr double big = 0x1p52;
  const double a = std::fabs(x);
  if (!(a < big)) return x;
  const double t = std::copysign((a + big) - big, x);
  return t > x ? t - 1.0 : t;
}
inline double vsqrt(double x) { return std::sqrt(x); }
inline double vabs(double x) { return std::fabs(x); }
inline std::uint64_t as_bits(double x) { return std::bit_cast<std::uint64_t>(x); }
inline double as_double(std::uint64_t u) { return std::bit_cast<double>(u); }

template <int K>
inline std::uint64_t shl(std::uint64_t x) {
  return x << K;
}
template <int K>
inline std::uint64_t shr(std::uint64_t x) {
  return x >> K;
}

template <class V>
struct lane_traits;

template <>
struct lane_traits<double> {
  using U = std::uint64_t;
  static constexpr int width = 1;
};

// ---- constants ------------------------------------------------------------

namespace detail {
// pi/4 split into pieces of 30 significant bits so that j * piece is exact
// for octant counts up to 2^23.
inline constexpr double kPio4Hi = 0x1.921fb54000000p-1;
inline constexpr double kPio4Mid = 0x1.10b4611800000p-31;
inline constexpr double kPio4Lo = 0x1.313198a2e0370p-62;
inline constexpr double kFourOverPi = 1.27323954473516268615;
inline constexpr double kLn2Hi = 0.693359375;
inline constexpr double kLn2Lo = -2.121944400546905827679e-4;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kTwoPi = 6.28318530717958647693;
}  // namespace detail

// ---- sin / cos ------------------------------------------------------------

/// sin and cos together. Cody-Waite reduction to [-pi/4, pi/4] followed by
/// Taylor polynomials of degree 19 / 18, accurate to a few ulp for
/// |x| < 2^23 * pi/4.
template <class V>
inline void sincos(V x, V& s_out, V& c_out) {
  using namespace detail;
  const V ax = vabs(x);
  V j = vfloor(ax * V(kFourOverPi));
  j = j + (j - V(2.0) * vfloor(j * V(0.5)));  // round odd octants up
  const V z = ((ax - j * V(kPio4Hi)) - j * V(kPio4Mid)) - j * V(kPio4Lo);
  const V q = j - V(8.0) * vfloor(j * V(0.125));  // 0, 2, 4 or 6
  const V zz = z * z;

  // 1/(2k+1)! and 1/(2k)! with alternating signs.
  V ps = V(1.0 / 121645100408832000.0);
  ps = V(-1.0 / 355687428096000.0) + zz * ps;
  ps = V(1.0 / 1307674368000.0) + zz * ps;
  ps = V(-1.0 / 6227020800.0) + zz * ps;
  ps = V(1.0 / 39916800.0) + zz * ps;
  ps = V(-1.0 / 362880.0) + zz * ps;
  ps = V(1.0 / 5040.0) + zz * ps;
  ps = V(-1.0 / 120.0) + zz * ps;
  ps = V(1.0 / 6.0) + zz * ps;
  const V sz = z - z * zz * ps;

  V pc = V(1.0 / 6402373705728000.0);
  pc = V(-1.0 / 20922789888000.0) + zz * pc;
  pc = V(1.0 / 87178291200.0) + zz * pc;
  pc = V(-1.0 / 479001600.0) + zz * pc;
  pc = V(1.0 / 3628800.0) + zz * pc;
  pc = V(-1.0 / 40320.0) + zz * pc;
  pc = V(1.0 / 720.0) + zz * pc;
  pc = V(-1.0 / 24.0) + zz * pc;
  pc = V(0.5) + zz * pc;
  const V cz = V(1.0) - zz * pc;

  const auto swap = (q == V(2.0)) | (q == V(6.0));
  const V s0 = select(swap, cz, sz);
  const V c0 = select(swap, sz, cz);
  const V s1 = select(q > V(3.0), V(0.0) - s0, s0);
  const V c1 = select((q > V(1.0)) & (q < V(5.0)), V(0.0) - c0, c0);
  s_out = select(x < V(0.0), V(0.0) - s1, s1);
  c_out = c1;
}

// ---- log ------------------------------------------------------------------

/// Natural logarithm of a positive normal number: exponent split plus
/// 2 atanh((m-1)/(m+1)) on m in [sqrt(1/2), sqrt(2)).
template <class V>
inline V log_positive(V x) {
  using U = typename lane_traits<V>::U;
  using namespace detail;
  const U bits = as_bits(x);
  const U exp_field = shr<52>(bits) & U(0x7FFull);
  // exact integer -> double via the 2^52 magic constant
  V e = as_double(exp_field | U(0x4330000000000000ull)) - V(4503599627370496.0);
  e = e - V(1022.0);
  V m = as_double((bits & U(0x000FFFFFFFFFFFFFull)) | U(0x3FE0000000000000ull));
  const auto low = m < V(kSqrtHalf);
  m = select(low, m + m, m);
  e = select(low, e - V(1.0), e);

  const V s = (m - V(1.0)) / (m + V(1.0));
  const V s2 = s * s;
  V p = V(1.0 / 23.0);
  p = V(1.0 / 21.0) + s2 * p;
  p = V(1.0 / 19.0) + s2 * p;
  p = V(1.0 / 17.0) + s2 * p;
  p = V(1.0 / 15.0) + s2 * p;
  p = V(1.0 / 13.0) + s2 * p;
  p = V(1.0 / 11.0) + s2 * p;
  p = V(1.0 / 9.0) + s2 * p;
  p = V(1.0 / 7.0) + s2 * p;
  p = V(1.0 / 5.0) + s2 * p;
  p = V(1.0 / 3.0) + s2 * p;
  const V log_m = V(2.0) * s + V(2.0) * s * s2 * p;
  return e * V(kLn2Hi) + (log_m + e * V(kLn2Lo));
}

// ---- uniform / normal deviates -------------------------------------------

/// 52 random bits -> double in [1, 2).
template <class U>
inline auto unit_interval_1_2(U raw) {
  return as_double(shr<12>(raw) | U(0x3FF0000000000000ull));
}

/// Box-Muller pair from two raw 64-bit draws. u1 = 2 - [1,2) lies in (0,1].
template <class V, class U>
inline void box_muller(U raw1, U raw2, V& z0, V& z1) {
  const V u1 = V(2.0) - unit_interval_1_2(raw1);
  const V u2 = unit_interval_1_2(raw2) - V(1.0);
  const V r = vsqrt(V(-2.0) * log_positive(u1));
  V s, c;
  sincos(V(detail::kTwoPi) * u2, s, c);
  z0 = r * c;
  z1 = r * s;
}

// ---- xoshiro256++ step ----------------------------------------------------

template <int K, class U>
inline U rotl(U x) {
  return shl<K>(x) | shr<64 - K>(x);
}

/// One xoshiro256++ step on a state held in four lane registers.
template <class U>
inline U xoshiro_next(U& s0, U& s1, U& s2, U& s3) {
  const U result = rotl<23>(s0 + s3) + s0;
  const U t = shl<17>(s1);
  s2 = s2 ^ s0;
  s3 = s3 ^ s1;
  s1 = s1 ^ s2;
  s0 = s0 ^ s3;
  s2 = s2 ^ t;
  s3 = rotl<45>(s3);
  return result;
}

}  // namespace rolldisc::simd
