#pragma once

// Four double lanes on AVX2. Include only from translation units compiled
// with -mavx2.

#if !defined(__AVX2__)
#error "f64x4.hpp requires AVX2 code generation"
#endif

#include "rolldisc/simd/vmath.hpp"

#include <immintrin.h>

#include <cstdint>

namespace rolldisc::simd {

#define ROLLDISC_INLINE inline __attribute__((always_inline))

struct Mask4 {
  __m256d v;
};

struct F64x4 {
  __m256d v;

  F64x4() = default;
  ROLLDISC_INLINE F64x4(double x) : v(_mm256_set1_pd(x)) {}
  ROLLDISC_INLINE F64x4(__m256d x) : v(x) {}

  static ROLLDISC_INLINE F64x4 load(const double* p) { return _mm256_loadu_pd(p); }
  ROLLDISC_INLINE void store(double* p) const { _mm256_storeu_pd(p, v); }
};

struct U64x4 {
  __m256i v;

  U64x4() = default;
  ROLLDISC_INLINE U64x4(std::uint64_t x) : v(_mm256_set1_epi64x(static_cast<long long>(x))) {}
  ROLLDISC_INLINE U64x4(__m256i x) : v(x) {}

  static ROLLDISC_INLINE U64x4 load(const std::uint64_t* p) {
    return _mm256_loadu_si256(reinterpret_cast<const __m256i*>(p));
  }
  ROLLDISC_INLINE void store(std::uint64_t* p) const {
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(p), v);
  }
};

template <>
struct lane_traits<F64x4> {
  using U = U64x4;
  static constexpr int width = 4;
};

ROLLDISC_INLINE F64x4 operator+(F64x4 a, F64x4 b) { return _mm256_add_pd(a.v, b.v); }
ROLLDISC_INLINE F64x4 operator-(F64x4 a, F64x4 b) { return _mm256_sub_pd(a.v, b.v); }
ROLLDISC_INLINE F64x4 operator*(F64x4 a, F64x4 b) { return _mm256_mul_pd(a.v, b.v); }
ROLLDISC_INLINE F64x4 operator/(F64x4 a, F64x4 b) { return _mm256_div_pd(a.v, b.v); }

ROLLDISC_INLINE Mask4 operator<(F64x4 a, F64x4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ)}; }
ROLLDISC_INLINE Mask4 operator>(F64x4 a, F64x4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ)}; }
ROLLDISC_INLINE Mask4 operator==(F64x4 a, F64x4 b) { return {_mm256_cmp_pd(a.v, b.v, _CMP_EQ_OQ)}; }
ROLLDISC_INLINE Mask4 operator|(Mask4 a, Mask4 b) { return {_mm256_or_pd(a.v, b.v)}; }
ROLLDISC_INLINE Mask4 operator&(Mask4 a, Mask4 b) { return {_mm256_and_pd(a.v, b.v)}; }

ROLLDISC_INLINE F64x4 select(Mask4 m, F64x4 a, F64x4 b) { return _mm256_blendv_pd(b.v, a.v, m.v); }
ROLLDISC_INLINE F64x4 vfloor(F64x4 x) { return _mm256_round_pd(x.v, _MM_FROUND_TO_NEG_INF | _MM_FROUND_NO_EXC); }
ROLLDISC_INLINE F64x4 vsqrt(F64x4 x) { return _mm256_sqrt_pd(x.v); }
ROLLDISC_INLINE F64x4 vabs(F64x4 x) {
  return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x.v);
}

ROLLDISC_INLINE U64x4 operator+(U64x4 a, U64x4 b) { return _mm256_add_epi64(a.v, b.v); }
ROLLDISC_INLINE U64x4 operator^(U64x4 a, U64x4 b) { return _mm256_xor_si256(a.v, b.v); }
ROLLDISC_INLINE U64x4 operator|(U64x4 a, U64x4 b) { return _mm256_or_si256(a.v, b.v); }
ROLLDISC_INLINE U64x4 operator&(U64x4 a, U64x4 b) { return _mm256_and_si256(a.v, b.v); }

template <int K>
ROLLDISC_INLINE U64x4 shl(U64x4 x) {
  return _mm256_slli_epi64(x.v, K);
}
template <int K>
ROLLDISC_INLINE U64x4 shr(U64x4 x) {
  return _mm256_srli_epi64(x.v, K);
}

ROLLDISC_INLINE U64x4 as_bits(F64x4 x) { return _mm256_castpd_si256(x.v); }
ROLLDISC_INLINE F64x4 as_double(U64x4 u) { return _mm256_castsi256_pd(u.v); }

#undef ROLLDISC_INLINE

}  // namespace rolldisc::simd
