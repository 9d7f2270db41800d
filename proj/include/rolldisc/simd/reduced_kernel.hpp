#pragma once

// Lane-generic Euler-Heun step of the reduced (omega, phi, theta) SDE.
// Internal to the kernel translation units.

#include "rolldisc/simd/vmath.hpp"

#include <cstddef>

namespace rolldisc::simd {

struct ReducedStepConfig {
  bool roll = true;
  double sqrt_dt = 0.0;
  bool reflect = false;
  double lo = 0.0;
  double hi = 0.0;
};

template <class V>
struct ReducedLaneState {
  V omega, phi, th1, th2, th3;
};

template <class V>
struct ReducedIncrement {
  V omega, phi, th1, th2, th3;
};

/// Normal deviates from a xoshiro256++ state held in lane registers. All
/// lanes consume at the same rate, so the cached-second-normal flag is shared.
template <class V>
struct LaneNormalStream {
  using U = typename lane_traits<V>::U;
  U s0, s1, s2, s3;
  V cache;
  bool has_cache;

  V next() {
    if (has_cache) {
      has_cache = false;
      return cache;
    }
    const U r1 = xoshiro_next(s0, s1, s2, s3);
    const U r2 = xoshiro_next(s0, s1, s2, s3);
    V z0, z1;
    box_muller(r1, r2, z0, z1);
    cache = z1;
    has_cache = true;
    return z0;
  }
};

/// Increment f(y) dW of the reduced Stratonovich system for a 9-dimensional
/// increment w in the Cartesian frame.
///
/// With A = dx/domega . w and B = dx/dphi . w (positional parts only), the
/// rolling system reads
///   domega = (A + 2 (w9 - w7)) / (K^2 + 8)
///   dphi   = (B + (2 w7 + 4 w8 + 2 w9) / 3) / (L^2 + 8/3)
///   dtheta = domega (-2, 0, 2) + dphi (2/3, 4/3, 2/3) + r (1, -1, 1),
/// r = (w7 - w8 + w9) / 3, and the sliding system is domega = A / K^2,
/// dphi = B / L^2, dtheta = (w7, w8, w9).
template <class V>
inline ReducedIncrement<V> reduced_increment(V omega, V phi, const V* w, bool roll) {
  V s, c, sp, cp;
  sincos(omega, s, c);
  sincos(phi, sp, cp);

  // R(phi)^T applied to each disc's positional increment.
  const V ux0 = cp * w[0] + sp * w[1];
  const V uy0 = cp * w[1] - sp * w[0];
  const V ux1 = cp * w[2] + sp * w[3];
  const V uy1 = cp * w[3] - sp * w[2];
  const V ux2 = cp * w[4] + sp * w[5];
  const V uy2 = cp * w[5] - sp * w[4];

  const V s3 = s / V(3.0);
  const V c3 = c / V(3.0);
  // d xbar0 / d omega = (-c, s/3, 0, -2s/3, c, s/3)
  const V a = (c * (ux2 - ux0) + s3 * (uy0 + uy2)) - (s3 + s3) * uy1;
  // J xbar0 = (c/3, -s, -2c/3, 0, c/3, s)
  const V b = (c3 * (ux0 + ux2) + s * (uy2 - uy0)) - (c3 + c3) * ux1;

  const V k2 = V(2.0 / 3.0) + V(4.0 / 3.0) * (c * c);
  const V l2 = V(2.0 / 3.0) + V(4.0 / 3.0) * (s * s);

  ReducedIncrement<V> inc;
  if (roll) {
    inc.omega = (a + V(2.0) * (w[8] - w[6])) / (k2 + V(8.0));
    inc.phi = (b + (V(2.0) * w[6] + V(4.0) * w[7] + V(2.0) * w[8]) / V(3.0)) /
              (l2 + V(8.0 / 3.0));
    const V r = ((w[6] - w[7]) + w[8]) / V(3.0);
    const V p23 = V(2.0 / 3.0) * inc.phi;
    const V w2 = V(2.0) * inc.omega;
    inc.th1 = (p23 - w2) + r;
    inc.th2 = V(4.0 / 3.0) * inc.phi - r;
    inc.th3 = (p23 + w2) + r;
  } else {
    inc.omega = a / k2;
    inc.phi = b / l2;
    inc.th1 = w[6];
    inc.th2 = w[7];
    inc.th3 = w[8];
  }
  return inc;
}

/// One Euler-Heun step: predictor y* = y + f(y) dW, corrector
/// y' = y + (f(y) + f(y*)) dW / 2, then the optional hard-wall reflection.
template <class V>
inline void reduced_heun_step(ReducedLaneState<V>& y, const V* w, const ReducedStepConfig& cfg) {
  const ReducedIncrement<V> f0 = reduced_increment(y.omega, y.phi, w, cfg.roll);
  const ReducedIncrement<V> f1 =
      reduced_increment(y.omega + f0.omega, y.phi + f0.phi, w, cfg.roll);
  y.omega = y.omega + V(0.5) * (f0.omega + f1.omega);
  y.phi = y.phi + V(0.5) * (f0.phi + f1.phi);
  y.th1 = y.th1 + V(0.5) * (f0.th1 + f1.th1);
  y.th2 = y.th2 + V(0.5) * (f0.th2 + f1.th2);
  y.th3 = y.th3 + V(0.5) * (f0.th3 + f1.th3);
  if (cfg.reflect) {
    const V lo(cfg.lo), hi(cfg.hi);
    y.omega = select(y.omega < lo, (lo + lo) - y.omega, y.omega);
    y.omega = select(y.omega > hi, (hi + hi) - y.omega, y.omega);
  }
}

template <class V>
inline void reduced_run(ReducedLaneState<V>& y, LaneNormalStream<V>& rng,
                        const ReducedStepConfig& cfg, std::size_t n_steps) {
  const V sqrt_dt(cfg.sqrt_dt);
  V w[9];
  for (std::size_t n = 0; n < n_steps; ++n) {
    for (int k = 0; k < 9; ++k) w[k] = sqrt_dt * rng.next();
    reduced_heun_step(y, w, cfg);
  }
}

}  // namespace rolldisc::simd
