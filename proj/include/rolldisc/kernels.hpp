#pragma once

// Batched hot loops with a scalar reference and an AVX2 variant. Both
// produce bit-identical results; the variant is chosen once at runtime.

#include "rolldisc/rng.hpp"

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace rolldisc::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Best available variant. ROLLDISC_SIMD=scalar forces the reference path.
Isa active_isa();
bool avx2_compiled();
bool avx2_supported();

/// Structure-of-arrays ensemble of reduced trajectories. Chart angles are
/// unbounded; omega modulo pi is the physical half angle.
struct ReducedEnsemble {
  std::vector<double> omega, phi, theta1, theta2, theta3;
  std::vector<Rng> rng;

  std::size_t size() const { return omega.size(); }
  void resize(std::size_t n);
};

struct ReducedParams {
  bool roll = true;
  double dt = 1e-4;
  /// Reflect omega into [lo, hi] after each step.
  bool reflect = false;
  double lo = 0.0;
  double hi = 0.0;
};

/// Advances every lane by n_steps Euler-Heun steps.
void advance_reduced(ReducedEnsemble& ens, const ReducedParams& params, std::size_t n_steps,
                     Isa isa = active_isa());

/// out[k * streams.size() + lane] = k-th normal of stream `lane`.
void fill_normals(std::span<Rng> streams, std::size_t per_stream, std::span<double> out,
                  Isa isa = active_isa());

namespace detail {
void advance_reduced_scalar(ReducedEnsemble& ens, const ReducedParams& params,
                            std::size_t begin, std::size_t end, std::size_t n_steps);
void fill_normals_scalar(std::span<Rng> streams, std::size_t begin, std::size_t end,
                         std::size_t per_stream, std::span<double> out);
#if defined(ROLLDISC_HAVE_AVX2)
// Handle lanes [begin, end) with end - begin a multiple of four.
void advance_reduced_avx2(ReducedEnsemble& ens, const ReducedParams& params, std::size_t begin,
                          std::size_t end, std::size_t n_steps);
void fill_normals_avx2(std::span<Rng> streams, std::size_t begin, std::size_t end,
                       std::size_t per_stream, std::span<double> out);
#endif
}  // namespace detail

}  // namespace rolldisc::kernels
