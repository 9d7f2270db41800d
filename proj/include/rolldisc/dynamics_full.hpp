#pragma once

// Underdamped constrained Langevin dynamics: the four-stage position /
// momentum splitting with Newton re-projection, stiff-spring bonds, Lagrange
// multiplier diagnostics and mass-scaled coordinates.

#include "rolldisc/model.hpp"
#include "rolldisc/rng.hpp"
#include "rolldisc/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>

namespace rolldisc::langevin {

struct SimParams {
  double mass = 0.1;
  double gamma = 1.0;
  double sigma = 1.0;
  /// Inverse temperature. NaN means "derive from sigma^2 = 2 gamma / beta".
  double beta = std::numeric_limits<double>::quiet_NaN();
  double dt = 5e-3;
  std::int64_t n_steps = 1;
  std::uint64_t seed = 1;
  ConstraintMode constraint_mode = ConstraintMode::slide;
  BondMode bond_mode = BondMode::hard;
  double stiffness = 1e4;
  int record_stride = 1;
  /// Soft bonds only: keep the bond rows in the velocity projection as well.
  bool soft_project_bonds = false;
  /// Contact tolerance for rolling rows when the bonds are springs.
  double soft_contact_tol = 0.25;
  double projection_tol = 1e-10;
  int projection_max_iter = 50;

  double effective_beta() const;
  /// Throws ArgumentError on violated invariants.
  void validate() const;
  /// Constraint rows used for the velocity projection in stage four.
  model::ConstraintSet velocity_constraints() const;
};

struct PhaseState {
  Configuration q;
  Vec9 p = Vec9::Zero();
};

/// Initial state: parameterised trimer at (omega, phi), no spin, at rest.
PhaseState initial_state(double omega = 1.5707963267948966, double phi = 0.0);

/// Bond + centre-of-mass rows only.
model::ConstraintSet holonomic_constraints();

/// Newton projection onto |x1-x2| = |x2-x3| = 1, sum x_i = 0 along
/// q + C_bond(q)^T mu.
Configuration project_position(const Configuration& q, double tol = 1e-10, int max_iter = 50);

/// Residuals (|d12|^2-1)/2, (|d23|^2-1)/2, com_x, com_y.
Eigen::Vector4d holonomic_residual(const Configuration& q);

/// -grad U for U = k sum (|x_i - x_j| - 1)^2.
Vec9 soft_bond_force(const Configuration& q, double k);
double soft_bond_energy(const Configuration& q, double k);

/// One full cycle of the splitting; rng supplies the nine normals.
void step_inplace(PhaseState& state, const SimParams& params, Rng& rng);
PhaseState step(const PhaseState& state, const SimParams& params, Rng& rng);

/// d/dt[C(x)] xdot, the curvature term: |v_i - v_j|^2 on bond rows, zero on
/// rolling and centre-of-mass rows.
RowVector constraint_curvature(const Configuration& q, const Vec9& velocity,
                               const model::ConstraintSet& cs);
/// Central difference of C(x + t v) v in t.
RowVector constraint_curvature_fd(const Configuration& q, const Vec9& velocity,
                                  const model::ConstraintSet& cs, double h = 1e-6);

/// Multipliers lambda of M xddot = F - C^T lambda keeping C xddot + curvature
/// = 0, where F collects every non-constraint force (friction, noise,
/// potential, external).
RowVector lagrange_multipliers(const PhaseState& state, const SimParams& params,
                               const Vec9& force);
Vec9 constrained_acceleration(const PhaseState& state, const SimParams& params,
                              const Vec9& force);

/// Coordinates x~ = M^{1/2} x for a diagonal mass matrix.
struct MassScaling {
  Vec9 mass;

  explicit MassScaling(const Vec9& mass_diagonal);

  Vec9 scale_position(const Vec9& x) const;
  Vec9 unscale_position(const Vec9& xt) const;
  /// Gamma~ = M^{-1/2} Gamma M^{-1/2}
  Mat9 scale_friction(const Mat9& gamma) const;
  Mat9 unscale_friction(const Mat9& gamma_t) const;
  /// sigma~ = M^{-1/2} sigma
  Mat9 scale_noise(const Mat9& sigma) const;
  Mat9 unscale_noise(const Mat9& sigma_t) const;
  /// C~ = C M^{-1/2}
  ConstraintMatrix scale_constraints(const ConstraintMatrix& C) const;
  ConstraintMatrix unscale_constraints(const ConstraintMatrix& C_t) const;
  /// U~(x~) = U(M^{-1/2} x~)
  std::function<double(const Vec9&)> scale_potential(std::function<double(const Vec9&)> U) const;
};

}  // namespace rolldisc::langevin
