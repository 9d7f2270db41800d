#pragma once

// Closed-form equilibrium results for the trimer: densities over the half
// angle, Fixman factor, Fokker-Planck flux and residual, subspace overlap,
// and the geometry of the horizontal distribution.

#include "rolldisc/overdamped.hpp"
#include "rolldisc/types.hpp"

#include <array>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rolldisc::analytics {

enum class DensityKind { slide_hard, roll_hard, slide_vibr, roll_vibr };

inline constexpr std::array<DensityKind, 4> kAllDensityKinds{
    DensityKind::slide_hard, DensityKind::roll_hard, DensityKind::slide_vibr,
    DensityKind::roll_vibr};

std::string_view to_string(DensityKind kind);
DensityKind parse_density_kind(std::string_view text);
DensityKind hard_kind(ConstraintMode mode);
DensityKind vibr_kind(ConstraintMode mode);

struct Domain {
  double lo = 0.0;
  double hi = std::numbers::pi;

  static Domain full() { return {0.0, std::numbers::pi}; }
  static Domain physical() { return {std::numbers::pi / 6, 5 * std::numbers::pi / 6}; }
  bool contains(double omega, double slack = 1e-12) const {
    return omega >= lo - slack && omega <= hi + slack;
  }
  friend bool operator==(const Domain&, const Domain&) = default;
};

/// Product of powers of a + b cos^2(omega); every density here has this
/// form, which gives exact log-derivatives.
class CosSquaredProduct {
 public:
  struct Factor {
    double a, b, power;
  };

  CosSquaredProduct() = default;
  explicit CosSquaredProduct(std::vector<Factor> factors) : factors_(std::move(factors)) {}

  double value(double omega) const;
  /// (log f)'
  double dlog(double omega) const;
  /// (log f)''
  double d2log(double omega) const;
  double derivative(double omega) const { return value(omega) * dlog(omega); }
  double second_derivative(double omega) const;

  static CosSquaredProduct of(DensityKind kind);
  static CosSquaredProduct constant();
  /// (alpha1 alpha2)^{-1} = sqrt(K^2+8) sqrt(L^2+8/3)
  static CosSquaredProduct inverse_alpha_product();

 private:
  std::vector<Factor> factors_;
};

/// Unnormalised density; throws ArgumentError outside the domain.
double density(DensityKind kind, double omega, Domain domain = Domain::full());

class DensityModel {
 public:
  DensityModel(DensityKind kind, Domain domain = Domain::full());

  DensityKind kind() const { return kind_; }
  const Domain& domain() const { return domain_; }
  double normalization() const { return norm_; }
  std::string id() const;

  double unnormalized(double omega) const { return shape_.value(omega); }
  double pdf(double omega) const;
  double cdf(double omega) const;
  /// CDF at each point of an ascending sequence, integrating panel by panel.
  std::vector<double> cdf_sorted(std::span<const double> ascending) const;
  /// Inverse CDF by bracketed root finding.
  double quantile(double p) const;

 private:
  DensityKind kind_;
  Domain domain_;
  CosSquaredProduct shape_;
  double norm_;
};

/// Adaptive Gauss-Kronrod integral of the normalised density over [a, b].
double integrate_density(const DensityModel& model, double a, double b);

/// |A|^{-1/2} with A the Gram matrix of the gradients of both bond lengths,
/// built from the parameterised configuration.
double fixman_factor(double omega);
/// ((1 + 2 cos^2) (1 + 2 sin^2))^{-1/2}
double fixman_closed_form(double omega);

// ---- Fokker-Planck --------------------------------------------------------

struct FluxCoefficients {
  double alpha1_sq, d_alpha1_sq;
  /// drift a = alpha1 alpha1' - L L' alpha1^2 alpha2^2 and its derivative
  double drift, d_drift;
};

FluxCoefficients flux_coefficients(double omega);

/// Flux (drift pi + alpha1^2 pi') divided by pi(omega).
double fp_flux(const CosSquaredProduct& density, double omega);
/// d/domega of the flux, divided by pi(omega).
double fp_residual(const CosSquaredProduct& density, double omega);
/// Same residual with pi', pi'' and the flux derivative by central differences.
double fp_residual_fd(const CosSquaredProduct& density, double omega, double h = 1e-6);

// ---- subspace overlap -----------------------------------------------------

struct OverlapResult {
  /// Product of the singular values of E^T F.
  double singular_product = 0.0;
  /// singular_product / (K L), the normalisation matching the closed form.
  double normalized = 0.0;
  /// (K^2+8)^{-1/2} (L^2+8/3)^{-1/2}, or 1 for sliding.
  double closed_form = 0.0;
};

OverlapResult subspace_overlap(double omega, ConstraintMode mode = ConstraintMode::roll);

// ---- geometry -------------------------------------------------------------

using IntVec5 = std::array<int, 5>;

struct GeometryTables {
  IntVec5 T_omega{1, 0, -2, 0, 2};
  IntVec5 T_phi{0, 3, 2, 4, 2};
  IntVec5 T_r{0, 0, 1, -1, 1};
  IntVec5 N1{-4, 0, -1, 0, 1};
  IntVec5 N2{0, -4, 1, 2, 1};

  /// Gradients of Q1 and Q2 in (omega, phi, theta1, theta2, theta3).
  const IntVec5& Q1() const { return N1; }
  const IntVec5& Q2() const { return N2; }

  /// Largest |N_i . T_j| in exact integer arithmetic.
  long max_normal_tangent_product() const;
};

int dot(const IntVec5& a, const IntVec5& b);

struct ConservedQuantities {
  double Q1 = 0.0;
  double Q2 = 0.0;
};

/// Q1 = -4 omega - theta1 + theta3, Q2 = -4 phi + theta1 + 2 theta2 + theta3.
ConservedQuantities conserved_quantities(const overdamped::ReducedState& s);

/// Angle between two vectors, accurate for nearly parallel inputs.
double vector_angle(const Vec9& a, const Vec9& b);

struct TangentMapReport {
  double omega = 0.0, phi = 0.0;
  /// Angles between grad f T_j and t_j, j = omega, phi, r.
  std::array<double, 3> angle{};
  /// grad f T_j = c_j t_j.
  std::array<double, 3> proportionality{};
  /// max |C_roll grad f T_j|.
  double constraint_residual = 0.0;
  /// Largest component of the Lie brackets of the parameterised fields.
  double lie_bracket_max = 0.0;
  /// Position part of grad f T_r.
  double t_r_position_norm = 0.0;

  bool passed(double tol = 1e-10) const;
};

TangentMapReport tangent_map_check(double omega, double phi);

// ---- tail probabilities ---------------------------------------------------

/// omega itself, the signed internal angle 2 omega in [0, 2 pi), or the
/// unsigned internal angle min(2 omega, 2 pi - 2 omega) in [0, pi].
enum class AngleVariable { omega, two_omega, internal_angle };

inline constexpr std::array<AngleVariable, 3> kAllAngleVariables{
    AngleVariable::omega, AngleVariable::two_omega, AngleVariable::internal_angle};

std::string_view to_string(AngleVariable v);

/// P(variable > threshold) under the normalised density on `domain`.
double tail_probability(DensityKind kind, double threshold, Domain domain,
                        AngleVariable variable = AngleVariable::omega);

struct TailRow {
  DensityKind kind;
  AngleVariable variable;
  Domain domain;
  std::string domain_name;
  double threshold;
  double probability;
  /// Reference tail value for this constraint mode (0.48 rolling, 0.45 sliding).
  double target;
  bool matches;
};

/// Every density kind x angle variable x (full|physical) combination at the
/// given threshold; NaN when the threshold is outside the domain.
std::vector<TailRow> tail_sweep(double threshold, double match_tol = 0.01);

}  // namespace rolldisc::analytics
