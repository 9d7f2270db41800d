#include "rolldisc/kernels.hpp"
#include "rolldisc/simd/reduced_kernel.hpp"

#include <cmath>

namespace rolldisc::kernels::detail {

void advance_reduced_scalar(ReducedEnsemble& ens, const ReducedParams& params,
                            std::size_t begin, std::size_t end, std::size_t n_steps) {
  const simd::ReducedStepConfig cfg{params.roll, std::sqrt(params.dt), params.reflect,
                                    params.lo, params.hi};
  for (std::size_t i = begin; i < end; ++i) {
    simd::ReducedLaneState<double> y{ens.omega[i], ens.phi[i], ens.theta1[i], ens.theta2[i],
                                     ens.theta3[i]};
    Rng& rng = ens.rng[i];
    auto& s = rng.engine().state();
    simd::LaneNormalStream<double> stream{s[0], s[1], s[2], s[3], rng.cached(),
                                          rng.has_cached()};
    simd::reduced_run(y, stream, cfg, n_steps);
    s = {stream.s0, stream.s1, stream.s2, stream.s3};
    rng.set_cache(stream.has_cache, stream.cache);
    ens.omega[i] = y.omega;
    ens.phi[i] = y.phi;
    ens.theta1[i] = y.th1;
    ens.theta2[i] = y.th2;
    ens.theta3[i] = y.th3;
  }
}

void fill_normals_scalar(std::span<Rng> streams, std::size_t begin, std::size_t end,
                         std::size_t per_stream, std::span<double> out) {
  const std::size_t n = streams.size();
  for (std::size_t i = begin; i < end; ++i) {
    for (std::size_t k = 0; k < per_stream; ++k) out[k * n + i] = streams[i].normal();
  }
}

}  // namespace rolldisc::kernels::detail
