#include "rolldisc/kernels.hpp"
#include "rolldisc/simd/f64x4.hpp"
#include "rolldisc/simd/reduced_kernel.hpp"

#include <cmath>

namespace rolldisc::kernels::detail {

namespace {

using simd::F64x4;
using simd::U64x4;

struct Gathered {
  U64x4 s[4];
};

Gathered gather_state(std::span<Rng> rngs, std::size_t i) {
  Gathered g;
  for (int w = 0; w < 4; ++w) {
    alignas(32) std::uint64_t lane[4];
    for (int l = 0; l < 4; ++l) lane[l] = rngs[i + l].engine().state()[w];
    g.s[w] = U64x4::load(lane);
  }
  return g;
}

void scatter_state(std::span<Rng> rngs, std::size_t i, const U64x4* s) {
  for (int w = 0; w < 4; ++w) {
    alignas(32) std::uint64_t lane[4];
    s[w].store(lane);
    for (int l = 0; l < 4; ++l) rngs[i + l].engine().state()[w] = lane[l];
  }
}

// Lanes can only share a register stream when their cache flags agree.
bool uniform_cache(std::span<Rng> rngs, std::size_t i) {
  const bool h = rngs[i].has_cached();
  for (int l = 1; l < 4; ++l) {
    if (rngs[i + l].has_cached() != h) return false;
  }
  return true;
}

simd::LaneNormalStream<F64x4> load_stream(std::span<Rng> rngs, std::size_t i) {
  const Gathered g = gather_state(rngs, i);
  alignas(32) double cache[4];
  for (int l = 0; l < 4; ++l) cache[l] = rngs[i + l].cached();
  return {g.s[0], g.s[1], g.s[2], g.s[3], F64x4::load(cache), rngs[i].has_cached()};
}

void store_stream(std::span<Rng> rngs, std::size_t i, const simd::LaneNormalStream<F64x4>& st) {
  const U64x4 s[4] = {st.s0, st.s1, st.s2, st.s3};
  scatter_state(rngs, i, s);
  alignas(32) double cache[4];
  st.cache.store(cache);
  for (int l = 0; l < 4; ++l) rngs[i + l].set_cache(st.has_cache, cache[l]);
}

}  // namespace

void advance_reduced_avx2(ReducedEnsemble& ens, const ReducedParams& params, std::size_t begin,
                          std::size_t end, std::size_t n_steps) {
  const simd::ReducedStepConfig cfg{params.roll, std::sqrt(params.dt), params.reflect,
                                    params.lo, params.hi};
  std::span<Rng> rngs(ens.rng);
  for (std::size_t i = begin; i + 4 <= end; i += 4) {
    if (!uniform_cache(rngs, i)) {
      advance_reduced_scalar(ens, params, i, i + 4, n_steps);
      continue;
    }
    simd::ReducedLaneState<F64x4> y{F64x4::load(&ens.omega[i]), F64x4::load(&ens.phi[i]),
                                    F64x4::load(&ens.theta1[i]), F64x4::load(&ens.theta2[i]),
                                    F64x4::load(&ens.theta3[i])};
    auto stream = load_stream(rngs, i);
    simd::reduced_run(y, stream, cfg, n_steps);
    store_stream(rngs, i, stream);
    y.omega.store(&ens.omega[i]);
    y.phi.store(&ens.phi[i]);
    y.th1.store(&ens.theta1[i]);
    y.th2.store(&ens.theta2[i]);
    y.th3.store(&ens.theta3[i]);
  }
}

void fill_normals_avx2(std::span<Rng> streams, std::size_t begin, std::size_t end,
                       std::size_t per_stream, std::span<double> out) {
  const std::size_t n = streams.size();
  for (std::size_t i = begin; i + 4 <= end; i += 4) {
    if (!uniform_cache(streams, i)) {
      fill_normals_scalar(streams, i, i + 4, per_stream, out);
      continue;
    }
    auto stream = load_stream(streams, i);
    for (std::size_t k = 0; k < per_stream; ++k) stream.next().store(&out[k * n + i]);
    store_stream(streams, i, stream);
  }
}

}  // namespace rolldisc::kernels::detail
