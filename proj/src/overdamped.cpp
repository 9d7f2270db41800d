#include "rolldisc/overdamped.hpp"

#include "rolldisc/dynamics_full.hpp"
#include "rolldisc/error.hpp"
#include "rolldisc/simd/reduced_kernel.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rolldisc::overdamped {

namespace {

// Rotate the three planar blocks of a 6-vector by phi.
Vec9 rotate_positions(const Eigen::Matrix<double, 6, 1>& xbar, double phi) {
  const double c = std::cos(phi), s = std::sin(phi);
  Vec9 out = Vec9::Zero();
  for (int d = 0; d < kDiscs; ++d) {
    const double u = xbar[2 * d], v = xbar[2 * d + 1];
    out[2 * d] = c * u - s * v;
    out[2 * d + 1] = s * u + c * v;
  }
  return out;
}

}  // namespace

Configuration parameterize(double omega, double phi, const Eigen::Vector3d& theta) {
  const double s = std::sin(omega), c = std::cos(omega);
  Eigen::Matrix<double, 6, 1> x0;
  x0 << -s, -c / 3.0, 0.0, 2.0 * c / 3.0, s, -c / 3.0;
  Vec9 x = rotate_positions(x0, phi);
  x.tail<3>() = theta;
  return Configuration(x);
}

Vec9 d_domega(double omega, double phi) {
  const double s = std::sin(omega), c = std::cos(omega);
  Eigen::Matrix<double, 6, 1> g;
  g << -c, s / 3.0, 0.0, -2.0 * s / 3.0, c, s / 3.0;
  return rotate_positions(g, phi);
}

Vec9 d_dphi(double omega, double phi) {
  // J x0 with J the quarter turn (u, v) -> (-v, u).
  const double s = std::sin(omega), c = std::cos(omega);
  Eigen::Matrix<double, 6, 1> g;
  g << c / 3.0, -s, -2.0 * c / 3.0, 0.0, c / 3.0, s;
  return rotate_positions(g, phi);
}

double K2(double omega) {
  const double c = std::cos(omega);
  return 2.0 / 3.0 + 4.0 / 3.0 * c * c;
}

double L2(double omega) {
  const double s = std::sin(omega);
  return 2.0 / 3.0 + 4.0 / 3.0 * s * s;
}

ReducedCoefficients reduced_coefficients(double omega, double phi) {
  ReducedCoefficients rc;
  rc.omega = omega;
  rc.phi = phi;
  rc.K2 = K2(omega);
  rc.L2 = L2(omega);
  rc.alpha1 = 1.0 / std::sqrt(rc.K2 + 8.0);
  rc.alpha2 = 1.0 / std::sqrt(rc.L2 + 8.0 / 3.0);

  const Vec9 dxo = d_domega(omega, phi);
  const Vec9 dxp = d_dphi(omega, phi);
  rc.S.col(0) = dxo;
  rc.S.col(1) = dxp;
  rc.T.setZero();
  rc.T.bottomRows<3>().setIdentity();
  rc.Y << rc.S, rc.T;
  rc.Q = rc.S.transpose() * rc.S;

  rc.t_omega = dxo;
  rc.t_omega.tail<3>() << -2.0, 0.0, 2.0;
  rc.t_omega *= rc.alpha1;
  rc.t_phi = dxp;
  rc.t_phi.tail<3>() << 2.0 / 3.0, 4.0 / 3.0, 2.0 / 3.0;
  rc.t_phi *= rc.alpha2;
  rc.t_r.setZero();
  rc.t_r.tail<3>() << 1.0, -1.0, 1.0;
  rc.t_r /= std::sqrt(3.0);

  rc.b1 = rc.alpha1 * rc.t_omega;
  rc.b2 = rc.alpha2 * rc.t_phi;

  const Mat9 P = model::projection(parameterize(omega, phi),
                                   model::ConstraintSet::for_mode(ConstraintMode::roll));
  const Vec9 ro = P * dxo - rc.K2 * rc.alpha1 * rc.t_omega;
  const Vec9 rp = P * dxp - rc.L2 * rc.alpha2 * rc.t_phi;
  rc.projection_residual = std::max(ro.cwiseAbs().maxCoeff(), rp.cwiseAbs().maxCoeff());
  if (!(rc.projection_residual < 1e-10)) {
    throw Error(fmt::format("projected Jacobian disagrees with horizontal basis at omega={} "
                            "(residual {:.3e})",
                            omega, rc.projection_residual));
  }
  return rc;
}

// ---- reduced --------------------------------------------------------------

double ReducedState::physical_omega() const {
  double w = std::fmod(omega, std::numbers::pi);
  if (w < 0.0) w += std::numbers::pi;
  return w;
}

ReducedState step_reduced_increment(const ReducedState& s, ConstraintMode mode, const Vec9& dW,
                                    const ReducedOptions& opt) {
  const simd::ReducedStepConfig cfg{mode == ConstraintMode::roll, 0.0,
                                    opt.boundary == OmegaBoundary::reflect, opt.lo, opt.hi};
  simd::ReducedLaneState<double> y{s.omega, s.phi, s.theta[0], s.theta[1], s.theta[2]};
  simd::reduced_heun_step(y, dW.data(), cfg);
  ReducedState out;
  out.omega = y.omega;
  out.phi = y.phi;
  out.theta << y.th1, y.th2, y.th3;
  return out;
}

ReducedState step_reduced(const ReducedState& s, ConstraintMode mode, double dt, Rng& rng,
                          const ReducedOptions& opt) {
  const double sq = std::sqrt(dt);
  Vec9 dW;
  for (int k = 0; k < kDim; ++k) dW[k] = sq * rng.normal();
  return step_reduced_increment(s, mode, dW, opt);
}

// ---- Cartesian Stratonovich ----------------------------------------------

Configuration step_cartesian_strat_increment(const Configuration& x, ConstraintMode mode,
                                             const Vec9& dW, const CartesianOptions& opt) {
  model::ConstraintSet cs = model::ConstraintSet::for_mode(mode);
  const model::ProjectionBundle b0 = model::assemble(x, cs);
  const Vec9 f0 = b0.project(dW);
  const Configuration xs(x.vec() + f0);
  cs.contact_tol = opt.predictor_contact_tol;
  const model::ProjectionBundle b1 = model::assemble(xs, cs);
  const Vec9 f1 = b1.project(dW);
  Configuration next(x.vec() + 0.5 * (f0 + f1));
  if (opt.reproject) {
    next = langevin::project_position(next, opt.projection_tol, opt.projection_max_iter);
  }
  return next;
}

Configuration step_cartesian_strat(const Configuration& x, ConstraintMode mode, double dt,
                                   Rng& rng, const CartesianOptions& opt) {
  const double sq = std::sqrt(dt);
  Vec9 dW;
  for (int k = 0; k < kDim; ++k) dW[k] = sq * rng.normal();
  return step_cartesian_strat_increment(x, mode, dW, opt);
}

// ---- Cartesian general ----------------------------------------------------

Vec9 Potential::gradient(const Vec9& x) const {
  constexpr double h = 1e-6;
  Vec9 g;
  for (int k = 0; k < kDim; ++k) {
    Vec9 xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (value(xp) - value(xm)) / (2.0 * h);
  }
  return g;
}

double OmegaWell::value(const Vec9& x) const {
  const Vec2 d1 = x.segment<2>(0) - x.segment<2>(2);
  const Vec2 d3 = x.segment<2>(4) - x.segment<2>(2);
  const double n = d1.norm() * d3.norm();
  const double ca = d1.dot(d3) / n;
  const double sa = (d1.x() * d3.y() - d1.y() * d3.x()) / n;
  const double a0 = 2.0 * omega0_;
  return k_ * (1.0 - (ca * std::cos(a0) + sa * std::sin(a0)));
}

Mat9 mobility(const Configuration& x, ConstraintMode mode, const Mat9& gamma, double contact_tol) {
  model::ConstraintSet cs = model::ConstraintSet::for_mode(mode);
  cs.contact_tol = contact_tol;
  const Mat9 P = model::projection(x, cs);
  // For gamma = g I the pseudo-inverse of P gamma P is P / g.
  const double g = gamma(0, 0);
  if (g > 0.0 && gamma == g * Mat9::Identity()) return P / g;
  return model::gamma_p_dagger_shifted(P, gamma);
}

namespace {

// Sum over an orthonormal basis u_a of range(P) of D_{u_a}(M) u_a, which
// equals the contraction sum_ij P_ij d_j M_{., i}.
Vec9 divergence_over_basis(const Configuration& x, const GeneralParams& params,
                           const Mat9& basis, const Vec9& weights) {
  const double h = params.fd_h;
  // Points x +- h u sit O(h^2) off the bonds.
  const double tol = 1e-6 + 10.0 * h * h;
  Vec9 div = Vec9::Zero();
  for (int a = 0; a < kDim; ++a) {
    if (weights[a] < 0.5) continue;
    const Vec9 u = basis.col(a);
    const Mat9 Mp = mobility(Configuration(x.vec() + h * u), params.mode, params.gamma, tol);
    const Mat9 Mm = mobility(Configuration(x.vec() - h * u), params.mode, params.gamma, tol);
    div += ((Mp - Mm) * u) / (2.0 * h);
  }
  return div;
}

}  // namespace

Vec9 ito_divergence(const Configuration& x, const GeneralParams& params) {
  const Mat9 P = model::projection(x, model::ConstraintSet::for_mode(params.mode));
  const Eigen::SelfAdjointEigenSolver<Mat9> eig(P);
  return divergence_over_basis(x, params, eig.eigenvectors(), eig.eigenvalues());
}

namespace {

Mat9 spectral_root(const Eigen::SelfAdjointEigenSolver<Mat9>& eig, double beta) {
  const Vec9& lam = eig.eigenvalues();
  const double cutoff = 1e-12 * lam.cwiseAbs().maxCoeff();
  Vec9 root = Vec9::Zero();
  for (int k = 0; k < kDim; ++k) {
    if (lam[k] > cutoff) root[k] = std::sqrt(2.0 / beta * lam[k]);
  }
  return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Mat9 noise_factor(const Mat9& gamma_p_dagger, double beta) {
  return spectral_root(
      Eigen::SelfAdjointEigenSolver<Mat9>(0.5 * (gamma_p_dagger + gamma_p_dagger.transpose())),
      beta);
}

Configuration step_cartesian_general_increment(const Configuration& x, const GeneralParams& params,
                                               const Vec9& dW) {
  if (!(params.beta > 0.0)) throw ArgumentError("beta must be positive");
  const Eigen::LLT<Mat9> spd(params.gamma);
  if (spd.info() != Eigen::Success || !params.gamma.isApprox(params.gamma.transpose(), 1e-12)) {
    throw ArgumentError("friction tensor must be symmetric positive definite");
  }
  const Mat9 M = mobility(x, params.mode, params.gamma);
  // range(M) = range(P), so one decomposition serves the divergence basis and
  // the noise factor.
  const Eigen::SelfAdjointEigenSolver<Mat9> eig(0.5 * (M + M.transpose()));
  const Vec9& lam = eig.eigenvalues();
  const double cut = 1e-9 * lam.cwiseAbs().maxCoeff();
  Vec9 in_range;
  for (int k = 0; k < kDim; ++k) in_range[k] = lam[k] > cut ? 1.0 : 0.0;
  Vec9 drift = (params.divergence_sign / params.beta) *
               divergence_over_basis(x, params, eig.eigenvectors(), in_range);
  if (params.potential != nullptr) drift -= M * params.potential->gradient(x.vec());
  Configuration next(x.vec() + params.dt * drift + spectral_root(eig, params.beta) * dW);
  if (params.projection.reproject) {
    next = langevin::project_position(next, params.projection.projection_tol,
                                      params.projection.projection_max_iter);
  }
  return next;
}

Configuration step_cartesian_general(const Configuration& x, const GeneralParams& params,
                                     Rng& rng) {
  const double sq = std::sqrt(params.dt);
  Vec9 dW;
  for (int k = 0; k < kDim; ++k) dW[k] = sq * rng.normal();
  return step_cartesian_general_increment(x, params, dW);
}

}  // namespace rolldisc::overdamped
