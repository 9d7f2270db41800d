#include "rolldisc/kernels.hpp"

#include "rolldisc/error.hpp"

#include <cstdlib>
#include <string>

namespace rolldisc::kernels {

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_compiled() {
#if defined(ROLLDISC_HAVE_AVX2)
  return true;
#else
  return false;
#endif
}

bool avx2_supported() {
#if defined(ROLLDISC_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() {
  static const Isa isa = [] {
    const char* env = std::getenv("ROLLDISC_SIMD");
    if (env != nullptr && std::string(env) == "scalar") return Isa::scalar;
    return avx2_supported() ? Isa::avx2 : Isa::scalar;
  }();
  return isa;
}

void ReducedEnsemble::resize(std::size_t n) {
  omega.resize(n);
  phi.resize(n);
  theta1.resize(n);
  theta2.resize(n);
  theta3.resize(n);
  rng.resize(n);
}

void advance_reduced(ReducedEnsemble& ens, const ReducedParams& params, std::size_t n_steps,
                     Isa isa) {
  const std::size_t n = ens.size();
  if (ens.rng.size() != n || ens.phi.size() != n || ens.theta1.size() != n ||
      ens.theta2.size() != n || ens.theta3.size() != n) {
    throw ArgumentError("reduced ensemble arrays have inconsistent lengths");
  }
  if (!(params.dt > 0.0)) throw ArgumentError("time step must be positive");
  std::size_t done = 0;
#if defined(ROLLDISC_HAVE_AVX2)
  if (isa == Isa::avx2 && avx2_supported()) {
    done = n - n % 4;
    detail::advance_reduced_avx2(ens, params, 0, done, n_steps);
  }
#else
  (void)isa;
#endif
  detail::advance_reduced_scalar(ens, params, done, n, n_steps);
}

void fill_normals(std::span<Rng> streams, std::size_t per_stream, std::span<double> out,
                  Isa isa) {
  const std::size_t n = streams.size();
  if (out.size() < n * per_stream) throw ArgumentError("normal buffer too small");
  std::size_t done = 0;
#if defined(ROLLDISC_HAVE_AVX2)
  if (isa == Isa::avx2 && avx2_supported()) {
    done = n - n % 4;
    detail::fill_normals_avx2(streams, 0, done, per_stream, out);
  }
#else
  (void)isa;
#endif
  detail::fill_normals_scalar(streams, done, n, per_stream, out);
}

}  // namespace rolldisc::kernels
