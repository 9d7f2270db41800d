#pragma once

// Overdamped dynamics at two levels: Cartesian SDEs on the 9-dimensional
// state (Stratonovich projected noise, and the general Ito form with a
// pseudoinverse mobility) and the reduced (omega, phi, theta) system.

#include "rolldisc/model.hpp"
#include "rolldisc/rng.hpp"
#include "rolldisc/types.hpp"

#include <numbers>

namespace rolldisc::overdamped {

// ---- parameterisation -----------------------------------------------------

/// Trimer with half internal angle omega, rotated by phi; spins zero.
Configuration parameterize(double omega, double phi, const Eigen::Vector3d& theta = Eigen::Vector3d::Zero());

/// dx/domega and dx/dphi (spin entries zero).
Vec9 d_domega(double omega, double phi);
Vec9 d_dphi(double omega, double phi);

double K2(double omega);
double L2(double omega);

using Mat92 = Eigen::Matrix<double, kDim, 2>;
using Mat93 = Eigen::Matrix<double, kDim, 3>;
using Mat95 = Eigen::Matrix<double, kDim, 5>;

struct ReducedCoefficients {
  double omega = 0.0;
  double phi = 0.0;
  double K2 = 0.0;
  double L2 = 0.0;
  double alpha1 = 0.0;
  double alpha2 = 0.0;
  Vec9 t_omega, t_phi, t_r;
  Vec9 b1, b2;
  Mat92 S;
  Mat93 T;
  Mat95 Y;
  Eigen::Matrix2d Q;
  /// max |P dx/domega - K^2/sqrt(K^2+8) t_omega|, same for phi.
  double projection_residual = 0.0;
};

/// Throws Error if the projected Jacobian columns disagree with the
/// horizontal basis by more than 1e-10.
ReducedCoefficients reduced_coefficients(double omega, double phi = 0.0);

// ---- reduced system -------------------------------------------------------

/// Chart coordinates. omega and phi are kept unbounded: (omega + pi, phi) is
/// the same configuration as (omega, phi + pi), so omega mod pi is the
/// physical half angle.
struct ReducedState {
  double omega = std::numbers::pi / 2;
  double phi = 0.0;
  Eigen::Vector3d theta = Eigen::Vector3d::Zero();

  double physical_omega() const;
};

enum class OmegaBoundary { periodic, reflect };

struct ReducedOptions {
  OmegaBoundary boundary = OmegaBoundary::periodic;
  double lo = std::numbers::pi / 6;
  double hi = 5 * std::numbers::pi / 6;
};

/// Euler-Heun step driven by the 9-dimensional increment dW.
ReducedState step_reduced_increment(const ReducedState& s, ConstraintMode mode, const Vec9& dW,
                                    const ReducedOptions& opt = {});
/// Draws dW = sqrt(dt) N from rng, consuming nine normals in order.
ReducedState step_reduced(const ReducedState& s, ConstraintMode mode, double dt, Rng& rng,
                          const ReducedOptions& opt = {});

// ---- Cartesian systems ----------------------------------------------------

struct CartesianOptions {
  /// Rolling rows at the predictor point, which sits O(dt) off the bonds.
  double predictor_contact_tol = 0.25;
  double projection_tol = 1e-10;
  int projection_max_iter = 50;
  bool reproject = true;
};

/// x* = x + P(x) dW, x' = x + (P(x) + P(x*)) dW / 2, then Newton re-projection.
Configuration step_cartesian_strat_increment(const Configuration& x, ConstraintMode mode,
                                             const Vec9& dW, const CartesianOptions& opt = {});
Configuration step_cartesian_strat(const Configuration& x, ConstraintMode mode, double dt,
                                   Rng& rng, const CartesianOptions& opt = {});

class Potential {
 public:
  virtual ~Potential() = default;
  virtual double value(const Vec9& x) const = 0;
  /// Central differences unless overridden.
  virtual Vec9 gradient(const Vec9& x) const;
};

class ZeroPotential final : public Potential {
 public:
  double value(const Vec9&) const override { return 0.0; }
  Vec9 gradient(const Vec9&) const override { return Vec9::Zero(); }
};

/// k (1 - cos(2 omega - 2 omega0)) written through the oriented bond angle,
/// which pins the half angle at omega0.
class OmegaWell final : public Potential {
 public:
  OmegaWell(double omega0, double k) : omega0_(omega0), k_(k) {}
  double value(const Vec9& x) const override;

 private:
  double omega0_;
  double k_;
};

struct GeneralParams {
  Mat9 gamma = Mat9::Identity();
  double beta = 1.0;
  double dt = 1e-3;
  ConstraintMode mode = ConstraintMode::roll;
  const Potential* potential = nullptr;
  /// Step of the central differences in the divergence term.
  double fd_h = 1e-6;
  /// Sign in front of beta^{-1} sum_ij P_ij d_j (Gamma_P^+)_ki.
  double divergence_sign = 1.0;
  CartesianOptions projection;
};

/// sum_ij P_ij d_j (Gamma_P^+)_ki, evaluated as sum_a D_{u_a}(Gamma_P^+) u_a
/// over an orthonormal basis u_a of range(P).
Vec9 ito_divergence(const Configuration& x, const GeneralParams& params);

/// Symmetric square root of 2 beta^{-1} Gamma_P^+, eigenvalues below
/// 1e-12 lambda_max dropped.
Mat9 noise_factor(const Mat9& gamma_p_dagger, double beta);

/// Gamma_P^+ at x for the given constraint mode.
Mat9 mobility(const Configuration& x, ConstraintMode mode, const Mat9& gamma,
              double contact_tol = 1e-6);

Configuration step_cartesian_general_increment(const Configuration& x, const GeneralParams& params,
                                               const Vec9& dW);
Configuration step_cartesian_general(const Configuration& x, const GeneralParams& params,
                                     Rng& rng);

/// Time step of the general equation that matches a Stratonovich step dt_s
/// of the projected-noise equation: t_general = t_strat * beta / 2.
inline double general_time_step(double dt_strat, double beta) { return dt_strat * beta / 2.0; }

}  // namespace rolldisc::overdamped
