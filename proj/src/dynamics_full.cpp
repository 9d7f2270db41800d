#include "rolldisc/dynamics_full.hpp"

#include "rolldisc/error.hpp"
#include "rolldisc/overdamped.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rolldisc::langevin {

namespace {

using Mat49 = Eigen::Matrix<double, 4, kDim>;

// Gradients of the holonomic residuals: the two bond rows and the two
// centre-of-mass rows.
Mat49 holonomic_jacobian(const Configuration& q) {
  Mat49 J;
  J.row(0) = model::bond_row(q, kTrimerPairs[0]).transpose();
  J.row(1) = model::bond_row(q, kTrimerPairs[1]).transpose();
  J.row(2) = model::com_row(0).transpose();
  J.row(3) = model::com_row(1).transpose();
  return J;
}

Vec9 project_velocity(const Configuration& q, const model::ConstraintSet& cs, const Vec9& v) {
  const ConstraintMatrix C = model::constraint_matrix(q, cs);
  if (C.rows() == 0) return v;
  const GramMatrix G = C * C.transpose();
  const Eigen::LLT<GramMatrix> llt(G);
  if (llt.info() != Eigen::Success) {
    throw NumericalRankError("velocity projection: Gram matrix not positive definite", INFINITY);
  }
  const RowVector cv = C * v;
  return v - C.transpose() * llt.solve(cv);
}

}  // namespace

double SimParams::effective_beta() const {
  return std::isnan(beta) ? 2.0 * gamma / (sigma * sigma) : beta;
}

void SimParams::validate() const {
  if (!(mass > 0.0)) throw ArgumentError("mass must be positive");
  if (!(gamma >= 0.0)) throw ArgumentError("friction must be non-negative");
  if (!(sigma >= 0.0)) throw ArgumentError("noise amplitude must be non-negative");
  if (!(dt > 0.0)) throw ArgumentError("time step must be positive");
  if (n_steps < 1) throw ArgumentError("n_steps must be at least 1");
  if (record_stride < 1) throw ArgumentError("record_stride must be at least 1");
  if (bond_mode == BondMode::soft && !(stiffness > 0.0)) {
    throw ArgumentError("soft bonds need a positive stiffness");
  }
  if (!std::isnan(beta)) {
    if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
    const double lhs = sigma * sigma;
    const double rhs = 2.0 * gamma / beta;
    if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(rhs))) {
      throw ArgumentError(fmt::format(
          "fluctuation-dissipation violated: sigma^2 = {} but 2 gamma / beta = {}", lhs, rhs));
    }
  }
}

model::ConstraintSet SimParams::velocity_constraints() const {
  model::ConstraintSet cs = model::ConstraintSet::for_mode(constraint_mode);
  if (bond_mode == BondMode::soft) {
    cs.bonds_enabled = soft_project_bonds;
    cs.contact_tol = soft_contact_tol;
  }
  return cs;
}

PhaseState initial_state(double omega, double phi) {
  return PhaseState{overdamped::parameterize(omega, phi), Vec9::Zero()};
}

model::ConstraintSet holonomic_constraints() {
  model::ConstraintSet cs;
  cs.rolling_enabled = false;
  return cs;
}

Eigen::Vector4d holonomic_residual(const Configuration& q) {
  const Vec2 d12 = q.position(1) - q.position(2);
  const Vec2 d23 = q.position(2) - q.position(3);
  const Vec2 com = q.center_of_mass_sum();
  return {0.5 * (d12.squaredNorm() - 1.0), 0.5 * (d23.squaredNorm() - 1.0), com.x(), com.y()};
}

Configuration project_position(const Configuration& q, double tol, int max_iter) {
  Eigen::Vector4d r = holonomic_residual(q);
  if (r.cwiseAbs().maxCoeff() < tol) return q;

  const Mat49 J0 = holonomic_jacobian(q);
  Eigen::Vector4d mu = Eigen::Vector4d::Zero();
  Configuration qk = q;
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::Matrix4d A = holonomic_jacobian(qk) * J0.transpose();
    const Eigen::PartialPivLU<Eigen::Matrix4d> lu(A);
    mu -= lu.solve(r);
    qk.vec() = q.vec() + J0.transpose() * mu;
    r = holonomic_residual(qk);
    if (!std::isfinite(r.squaredNorm())) break;
    if (r.cwiseAbs().maxCoeff() < tol) return qk;
  }
  throw ConvergenceError(
      fmt::format("position projection did not converge in {} iterations", max_iter), max_iter,
      r.cwiseAbs().maxCoeff());
}

double soft_bond_energy(const Configuration& q, double k) {
  double u = 0.0;
  for (const Pair& pr : kTrimerPairs) {
    const double e = q.bond_length(pr) - 1.0;
    u += k * e * e;
  }
  return u;
}

Vec9 soft_bond_force(const Configuration& q, double k) {
  if (!(k > 0.0)) throw ArgumentError("stiffness must be positive");
  Vec9 f = Vec9::Zero();
  for (const Pair& pr : kTrimerPairs) {
    const Vec2 d = q.position(pr.i) - q.position(pr.j);
    const double len = d.norm();
    if (!(len > 0.0)) {
      throw PreconditionError(
          fmt::format("coincident discs ({},{}): spring force undefined", pr.i, pr.j));
    }
    const Vec2 g = (2.0 * k * (len - 1.0) / len) * d;
    f.segment<2>(2 * (pr.i - 1)) -= g;
    f.segment<2>(2 * (pr.j - 1)) += g;
  }
  return f;
}

void step_inplace(PhaseState& state, const SimParams& params, Rng& rng) {
  const double dt = params.dt;
  const double inv_m = 1.0 / params.mass;

  state.q.vec() += (inv_m * dt) * state.p;
  if (params.bond_mode == BondMode::hard) {
    state.q = project_position(state.q, params.projection_tol, params.projection_max_iter);
  }

  Vec9 noise;
  for (int k = 0; k < kDim; ++k) noise[k] = rng.normal();
  const double decay = params.gamma * inv_m * dt;
  Vec9 p = state.p - decay * state.p + (params.sigma * std::sqrt(dt)) * noise;
  if (params.bond_mode == BondMode::soft) p += dt * soft_bond_force(state.q, params.stiffness);

  state.p = project_velocity(state.q, params.velocity_constraints(), p);
}

PhaseState step(const PhaseState& state, const SimParams& params, Rng& rng) {
  PhaseState next = state;
  step_inplace(next, params, rng);
  return next;
}

RowVector constraint_curvature(const Configuration& q, const Vec9& velocity,
                               const model::ConstraintSet& cs) {
  RowVector out = RowVector::Zero(cs.rows());
  int r = 0;
  if (cs.bonds_enabled) {
    for (const Pair& pr : cs.pairs) {
      const Vec2 dv = velocity.segment<2>(2 * (pr.i - 1)) - velocity.segment<2>(2 * (pr.j - 1));
      out[r++] = dv.squaredNorm();
    }
  }
  // Rolling rows give perp(dv).dv = 0 and the centre-of-mass rows are
  // constant, so the remaining entries stay zero.
  (void)q;
  return out;
}

RowVector constraint_curvature_fd(const Configuration& q, const Vec9& velocity,
                                  const model::ConstraintSet& cs, double h) {
  model::ConstraintSet loose = cs;
  loose.contact_tol = std::max(cs.contact_tol, 10.0 * h * velocity.norm() + 1e-6);
  const Configuration plus(q.vec() + h * velocity);
  const Configuration minus(q.vec() - h * velocity);
  const ConstraintMatrix Cp = model::constraint_matrix(plus, loose);
  const ConstraintMatrix Cm = model::constraint_matrix(minus, loose);
  return (Cp - Cm) * velocity / (2.0 * h);
}

RowVector lagrange_multipliers(const PhaseState& state, const SimParams& params,
                               const Vec9& force) {
  const model::ProjectionBundle b = model::assemble(state.q, params.velocity_constraints());
  const Vec9 v = state.p / params.mass;
  const RowVector curv = constraint_curvature(state.q, v, params.velocity_constraints());
  const RowVector rhs = b.C * force + params.mass * curv;
  return b.G_llt.solve(rhs);
}

Vec9 constrained_acceleration(const PhaseState& state, const SimParams& params,
                              const Vec9& force) {
  const ConstraintMatrix C = model::constraint_matrix(state.q, params.velocity_constraints());
  const RowVector lambda = lagrange_multipliers(state, params, force);
  return (force - C.transpose() * lambda) / params.mass;
}

MassScaling::MassScaling(const Vec9& mass_diagonal) : mass(mass_diagonal) {
  for (int k = 0; k < kDim; ++k) {
    if (!(mass[k] > 0.0)) {
      throw ArgumentError(fmt::format("mass entry {} is not positive ({})", k, mass[k]));
    }
  }
}

Vec9 MassScaling::scale_position(const Vec9& x) const {
  return x.cwiseProduct(mass.cwiseSqrt());
}

Vec9 MassScaling::unscale_position(const Vec9& xt) const {
  return xt.cwiseQuotient(mass.cwiseSqrt());
}

Mat9 MassScaling::scale_friction(const Mat9& gamma) const {
  const Vec9 s = mass.cwiseSqrt().cwiseInverse();
  return s.asDiagonal() * gamma * s.asDiagonal();
}

Mat9 MassScaling::unscale_friction(const Mat9& gamma_t) const {
  const Vec9 s = mass.cwiseSqrt();
  return s.asDiagonal() * gamma_t * s.asDiagonal();
}

Mat9 MassScaling::scale_noise(const Mat9& sigma) const {
  return mass.cwiseSqrt().cwiseInverse().asDiagonal() * sigma;
}

Mat9 MassScaling::unscale_noise(const Mat9& sigma_t) const {
  return mass.cwiseSqrt().asDiagonal() * sigma_t;
}

ConstraintMatrix MassScaling::scale_constraints(const ConstraintMatrix& C) const {
  return C * mass.cwiseSqrt().cwiseInverse().asDiagonal();
}

ConstraintMatrix MassScaling::unscale_constraints(const ConstraintMatrix& C_t) const {
  return C_t * mass.cwiseSqrt().asDiagonal();
}

std::function<double(const Vec9&)> MassScaling::scale_potential(
    std::function<double(const Vec9&)> U) const {
  return [U = std::move(U), m = mass](const Vec9& xt) {
    return U(xt.cwiseQuotient(m.cwiseSqrt()));
  };
}

}  // namespace rolldisc::langevin
