#include "rolldisc/analytics.hpp"

#include "rolldisc/error.hpp"
#include "rolldisc/model.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace rolldisc::analytics {

namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kPi = std::numbers::pi;

}  // namespace

std::string_view to_string(DensityKind kind) {
  switch (kind) {
    case DensityKind::slide_hard: return "slide_hard";
    case DensityKind::roll_hard: return "roll_hard";
    case DensityKind::slide_vibr: return "slide_vibr";
    case DensityKind::roll_vibr: return "roll_vibr";
  }
  return "?";
}

DensityKind parse_density_kind(std::string_view text) {
  for (DensityKind k : kAllDensityKinds) {
    if (to_string(k) == text) return k;
  }
  throw ArgumentError(fmt::format("unknown density kind '{}'", text));
}

DensityKind hard_kind(ConstraintMode mode) {
  return mode == ConstraintMode::roll ? DensityKind::roll_hard : DensityKind::slide_hard;
}

DensityKind vibr_kind(ConstraintMode mode) {
  return mode == ConstraintMode::roll ? DensityKind::roll_vibr : DensityKind::slide_vibr;
}

// ---- CosSquaredProduct ----------------------------------------------------

double CosSquaredProduct::value(double omega) const {
  const double c = std::cos(omega);
  double v = 1.0;
  for (const Factor& f : factors_) v *= std::pow(f.a + f.b * c * c, f.power);
  return v;
}

double CosSquaredProduct::dlog(double omega) const {
  const double c = std::cos(omega);
  const double s2 = std::sin(2.0 * omega);
  double g = 0.0;
  for (const Factor& f : factors_) g += f.power * (-f.b * s2) / (f.a + f.b * c * c);
  return g;
}

double CosSquaredProduct::d2log(double omega) const {
  const double c = std::cos(omega);
  const double s2 = std::sin(2.0 * omega);
  const double c2 = std::cos(2.0 * omega);
  double g = 0.0;
  for (const Factor& f : factors_) {
    const double v = f.a + f.b * c * c;
    const double d1 = -f.b * s2 / v;
    const double d2 = -2.0 * f.b * c2 / v;
    g += f.power * (d2 - d1 * d1);
  }
  return g;
}

double CosSquaredProduct::second_derivative(double omega) const {
  const double g = dlog(omega);
  return value(omega) * (d2log(omega) + g * g);
}

CosSquaredProduct CosSquaredProduct::of(DensityKind kind) {
  // 1 + 2 sin^2 = 3 - 2 cos^2 and 5 + 2 sin^2 = 7 - 2 cos^2.
  switch (kind) {
    case DensityKind::slide_hard:
      return CosSquaredProduct({{3.0, -2.0, 0.5}, {1.0, 2.0, 0.5}});
    case DensityKind::roll_hard:
      return CosSquaredProduct({{7.0, -2.0, 0.5}, {13.0, 2.0, 0.5}});
    case DensityKind::slide_vibr:
      return constant();
    case DensityKind::roll_vibr:
      return CosSquaredProduct(
          {{7.0, -2.0, 0.5}, {13.0, 2.0, 0.5}, {3.0, -2.0, -0.5}, {1.0, 2.0, -0.5}});
  }
  throw ArgumentError("unknown density kind");
}

CosSquaredProduct CosSquaredProduct::constant() { return CosSquaredProduct(std::vector<Factor>{}); }

CosSquaredProduct CosSquaredProduct::inverse_alpha_product() {
  // K^2 + 8 = 26/3 + 4/3 cos^2, L^2 + 8/3 = 14/3 - 4/3 cos^2
  return CosSquaredProduct({{26.0 / 3.0, 4.0 / 3.0, 0.5}, {14.0 / 3.0, -4.0 / 3.0, 0.5}});
}

double density(DensityKind kind, double omega, Domain domain) {
  if (!domain.contains(omega)) {
    throw ArgumentError(
        fmt::format("omega = {} outside the domain [{}, {}]", omega, domain.lo, domain.hi));
  }
  const double s = std::sin(omega), c = std::cos(omega);
  const double s2 = s * s, c2 = c * c;
  switch (kind) {
    case DensityKind::slide_hard:
      return std::sqrt(1.0 + 2.0 * s2) * std::sqrt(1.0 + 2.0 * c2);
    case DensityKind::roll_hard:
      return std::sqrt(5.0 + 2.0 * s2) * std::sqrt(13.0 + 2.0 * c2);
    case DensityKind::slide_vibr:
      return 1.0;
    case DensityKind::roll_vibr:
      return std::sqrt((5.0 + 2.0 * s2) / (1.0 + 2.0 * s2)) *
             std::sqrt((13.0 + 2.0 * c2) / (1.0 + 2.0 * c2));
  }
  throw ArgumentError("unknown density kind");
}

// ---- DensityModel ---------------------------------------------------------

namespace {

double cached_normalization(DensityKind kind, Domain domain, const CosSquaredProduct& shape) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(kind), domain.lo, domain.hi);
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double z = gauss_kronrod<double, 61>::integrate(
      [&](double w) { return shape.value(w); }, domain.lo, domain.hi, 15, 1e-14);
  std::lock_guard lock(mutex);
  cache.emplace(key, z);
  return z;
}

}  // namespace

DensityModel::DensityModel(DensityKind kind, Domain domain)
    : kind_(kind), domain_(domain), shape_(CosSquaredProduct::of(kind)) {
  if (!(domain.lo < domain.hi) || domain.lo < 0.0 || domain.hi > kPi) {
    throw ArgumentError(fmt::format("invalid domain [{}, {}]", domain.lo, domain.hi));
  }
  norm_ = cached_normalization(kind, domain, shape_);
}

std::string DensityModel::id() const {
  return fmt::format("{}[{:.6f},{:.6f}]", to_string(kind_), domain_.lo, domain_.hi);
}

double DensityModel::pdf(double omega) const {
  if (omega < domain_.lo || omega > domain_.hi) return 0.0;
  return shape_.value(omega) / norm_;
}

double DensityModel::cdf(double omega) const {
  if (omega <= domain_.lo) return 0.0;
  if (omega >= domain_.hi) return 1.0;
  return integrate_density(*this, domain_.lo, omega);
}

std::vector<double> DensityModel::cdf_sorted(std::span<const double> ascending) const {
  std::vector<double> out(ascending.size());
  double acc = 0.0;
  double prev = domain_.lo;
  auto f = [&](double w) { return shape_.value(w); };
  for (std::size_t k = 0; k < ascending.size(); ++k) {
    const double x = std::clamp(ascending[k], domain_.lo, domain_.hi);
    if (x < prev) throw ArgumentError("cdf_sorted needs ascending input");
    // Composite 10-point Gauss on panels no wider than 0.02 is exact to
    // rounding for these smooth integrands. Adaptive control at this
    // tolerance only chases noise and can cost seconds per gap.
    if (x > prev) {
      const int panels = static_cast<int>(std::ceil((x - prev) / 0.02));
      const double h = (x - prev) / panels;
      for (int j = 0; j < panels; ++j) {
        const double a = prev + j * h;
        const double b = j + 1 == panels ? x : a + h;
        acc += boost::math::quadrature::gauss<double, 10>::integrate(f, a, b);
      }
    }
    prev = x;
    out[k] = std::min(1.0, acc / norm_);
  }
  return out;
}

double DensityModel::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("quantile level outside [0, 1]");
  if (p == 0.0) return domain_.lo;
  if (p == 1.0) return domain_.hi;
  std::uintmax_t iters = 200;
  const auto r = boost::math::tools::toms748_solve(
      [&](double w) { return cdf(w) - p; }, domain_.lo, domain_.hi, -p, 1.0 - p,
      boost::math::tools::eps_tolerance<double>(50), iters);
  return 0.5 * (r.first + r.second);
}

double integrate_density(const DensityModel& model, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(
             [&](double w) { return model.unnormalized(w); }, a, b, 15, 1e-14) /
         model.normalization();
}

// ---- Fixman ---------------------------------------------------------------

double fixman_factor(double omega) {
  const Configuration x = overdamped::parameterize(omega, 0.0);
  Vec9 g1 = Vec9::Zero(), g2 = Vec9::Zero();
  const Vec2 e12 = (x.position(1) - x.position(2)).normalized();
  const Vec2 e23 = (x.position(2) - x.position(3)).normalized();
  g1.segment<2>(0) = e12;
  g1.segment<2>(2) = -e12;
  g2.segment<2>(2) = e23;
  g2.segment<2>(4) = -e23;
  Eigen::Matrix2d A;
  A << g1.dot(g1), g1.dot(g2), g2.dot(g1), g2.dot(g2);
  return 1.0 / std::sqrt(A.determinant());
}

double fixman_closed_form(double omega) {
  const double s = std::sin(omega), c = std::cos(omega);
  return 1.0 / std::sqrt((1.0 + 2.0 * c * c) * (1.0 + 2.0 * s * s));
}

// ---- Fokker-Planck --------------------------------------------------------

FluxCoefficients flux_coefficients(double omega) {
  const double c = std::cos(omega);
  const double s2 = std::sin(2.0 * omega), c2 = std::cos(2.0 * omega);
  // u = K^2 + 8 = 1 / alpha1^2, v = L^2 + 8/3 = 1 / alpha2^2, and L L' = v'/2.
  const double u = 26.0 / 3.0 + 4.0 / 3.0 * c * c;
  const double v = 14.0 / 3.0 - 4.0 / 3.0 * c * c;
  const double du = -4.0 / 3.0 * s2, ddu = -8.0 / 3.0 * c2;
  const double dv = 4.0 / 3.0 * s2, ddv = 8.0 / 3.0 * c2;
  const double uv = u * v;

  FluxCoefficients fc;
  fc.alpha1_sq = 1.0 / u;
  fc.d_alpha1_sq = -du / (u * u);
  fc.drift = -0.5 * du / (u * u) - 0.5 * dv / uv;
  fc.d_drift = -0.5 * ddu / (u * u) + du * du / (u * u * u) - 0.5 * ddv / uv +
               0.5 * dv * (du * v + u * dv) / (uv * uv);
  return fc;
}

double fp_flux(const CosSquaredProduct& density, double omega) {
  const FluxCoefficients fc = flux_coefficients(omega);
  return fc.drift + fc.alpha1_sq * density.dlog(omega);
}

double fp_residual(const CosSquaredProduct& density, double omega) {
  const FluxCoefficients fc = flux_coefficients(omega);
  const double g = density.dlog(omega);
  const double dg = density.d2log(omega);
  return fc.d_drift + fc.drift * g + fc.d_alpha1_sq * g + fc.alpha1_sq * (dg + g * g);
}

double fp_residual_fd(const CosSquaredProduct& density, double omega, double h) {
  auto flux = [&](double w) {
    const FluxCoefficients fc = flux_coefficients(w);
    const double dpi = (density.value(w + h) - density.value(w - h)) / (2.0 * h);
    return fc.drift * density.value(w) + fc.alpha1_sq * dpi;
  };
  return (flux(omega + h) - flux(omega - h)) / (2.0 * h) / density.value(omega);
}

// ---- subspace overlap -----------------------------------------------------

OverlapResult subspace_overlap(double omega, ConstraintMode mode) {
  const overdamped::ReducedCoefficients rc = overdamped::reduced_coefficients(omega, 0.0);
  const double K = std::sqrt(rc.K2), L = std::sqrt(rc.L2);
  Eigen::Matrix<double, kDim, 2> F;
  F.col(0) = rc.S.col(0) / K;
  F.col(1) = rc.S.col(1) / L;

  Eigen::MatrixXd E;
  if (mode == ConstraintMode::roll) {
    E.resize(kDim, 3);
    E << rc.t_omega, rc.t_phi, rc.t_r;
  } else {
    const Mat9 P = model::projection(overdamped::parameterize(omega, 0.0),
                                     model::ConstraintSet::for_mode(ConstraintMode::slide));
    const Eigen::SelfAdjointEigenSolver<Mat9> eig(P);
    E.resize(kDim, 0);
    for (int k = 0; k < kDim; ++k) {
      if (eig.eigenvalues()[k] > 0.5) {
        E.conservativeResize(Eigen::NoChange, E.cols() + 1);
        E.col(E.cols() - 1) = eig.eigenvectors().col(k);
      }
    }
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(E.transpose() * F);
  OverlapResult r;
  r.singular_product = svd.singularValues().prod();
  if (mode == ConstraintMode::roll) {
    r.normalized = r.singular_product / (K * L);
    r.closed_form = rc.alpha1 * rc.alpha2;
  } else {
    r.normalized = r.singular_product;
    r.closed_form = 1.0;
  }
  return r;
}

// ---- geometry -------------------------------------------------------------

int dot(const IntVec5& a, const IntVec5& b) {
  int s = 0;
  for (int k = 0; k < 5; ++k) s += a[k] * b[k];
  return s;
}

long GeometryTables::max_normal_tangent_product() const {
  long worst = 0;
  for (const IntVec5* n : {&N1, &N2}) {
    for (const IntVec5* t : {&T_omega, &T_phi, &T_r}) {
      worst = std::max(worst, static_cast<long>(std::abs(dot(*n, *t))));
    }
  }
  return worst;
}

ConservedQuantities conserved_quantities(const overdamped::ReducedState& s) {
  return {-4.0 * s.omega - s.theta[0] + s.theta[2],
          -4.0 * s.phi + s.theta[0] + 2.0 * s.theta[1] + s.theta[2]};
}

double vector_angle(const Vec9& a, const Vec9& b) {
  const Vec9 ua = a / a.norm();
  const Vec9 ub = b / b.norm();
  return 2.0 * std::atan2((ua - ub).norm(), (ua + ub).norm());
}

bool TangentMapReport::passed(double tol) const {
  for (int j = 0; j < 3; ++j) {
    if (!(angle[j] < tol) || !(proportionality[j] > 0.0)) return false;
  }
  return constraint_residual < tol && lie_bracket_max == 0.0 && t_r_position_norm == 0.0;
}

TangentMapReport tangent_map_check(double omega, double phi) {
  const overdamped::ReducedCoefficients rc = overdamped::reduced_coefficients(omega, phi);
  const GeometryTables g;
  auto as_vec = [](const IntVec5& v) {
    Eigen::Matrix<double, 5, 1> out;
    for (int k = 0; k < 5; ++k) out[k] = v[k];
    return out;
  };
  const std::array<const IntVec5*, 3> fields{&g.T_omega, &g.T_phi, &g.T_r};
  const std::array<const Vec9*, 3> targets{&rc.t_omega, &rc.t_phi, &rc.t_r};
  const ConstraintMatrix C = model::constraint_matrix(
      overdamped::parameterize(omega, phi), model::ConstraintSet::for_mode(ConstraintMode::roll));

  TangentMapReport rep;
  rep.omega = omega;
  rep.phi = phi;
  for (int j = 0; j < 3; ++j) {
    const Vec9 image = rc.Y * as_vec(*fields[j]);
    rep.angle[j] = vector_angle(image, *targets[j]);
    rep.proportionality[j] = image.dot(*targets[j]);
    rep.constraint_residual =
        std::max(rep.constraint_residual, (C * image).cwiseAbs().maxCoeff());
    if (j == 2) rep.t_r_position_norm = image.head<6>().norm();
  }

  // The fields are constant in (omega, phi, theta), so [X, Y] = DY X - DX Y
  // vanishes; evaluate it anyway by central differences of the field maps.
  const Eigen::Matrix<double, 5, 1> y0(omega, phi, 0.0, 0.0, 0.0);
  auto field = [&](int j, const Eigen::Matrix<double, 5, 1>&) { return as_vec(*fields[j]); };
  auto jacobian = [&](int j) {
    Eigen::Matrix<double, 5, 5> D;
    constexpr double h = 1e-6;
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix<double, 5, 1> yp = y0, ym = y0;
      yp[k] += h;
      ym[k] -= h;
      D.col(k) = (field(j, yp) - field(j, ym)) / (2.0 * h);
    }
    return D;
  };
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const Eigen::Matrix<double, 5, 1> br = jacobian(b) * field(a, y0) - jacobian(a) * field(b, y0);
      rep.lie_bracket_max = std::max(rep.lie_bracket_max, br.cwiseAbs().maxCoeff());
    }
  }
  return rep;
}

// ---- tails ----------------------------------------------------------------

std::string_view to_string(AngleVariable v) {
  switch (v) {
    case AngleVariable::omega: return "omega";
    case AngleVariable::two_omega: return "two_omega";
    case AngleVariable::internal_angle: return "internal_angle";
  }
  return "?";
}

namespace {

// Threshold expressed on the omega axis; the unsigned internal angle exceeds
// t on the band t/2 < omega < pi - t/2.
double omega_threshold(double threshold, AngleVariable variable) {
  return variable == AngleVariable::omega ? threshold : 0.5 * threshold;
}

}  // namespace

double tail_probability(DensityKind kind, double threshold, Domain domain,
                        AngleVariable variable) {
  const double w = omega_threshold(threshold, variable);
  if (!domain.contains(w, 0.0)) {
    throw ArgumentError(fmt::format("threshold {} ({}) outside the domain", threshold,
                                    to_string(variable)));
  }
  const DensityModel model(kind, domain);
  const double hi =
      variable == AngleVariable::internal_angle ? std::min(domain.hi, std::numbers::pi - w) : domain.hi;
  if (w >= hi) return 0.0;
  return integrate_density(model, w, hi);
}

std::vector<TailRow> tail_sweep(double threshold, double match_tol) {
  std::vector<TailRow> rows;
  const std::array<std::pair<const char*, Domain>, 2> domains{
      std::pair{"full", Domain::full()}, std::pair{"physical", Domain::physical()}};
  for (DensityKind kind : kAllDensityKinds) {
    const bool roll = kind == DensityKind::roll_hard || kind == DensityKind::roll_vibr;
    const double target = roll ? 0.48 : 0.45;
    for (AngleVariable var : kAllAngleVariables) {
      for (const auto& [name, dom] : domains) {
        TailRow row{kind, var, dom, name, threshold, std::nan(""), target, false};
        const double w = omega_threshold(threshold, var);
        if (dom.contains(w, 0.0)) {
          row.probability = tail_probability(kind, threshold, dom, var);
          row.matches = std::abs(row.probability - target) <= match_tol;
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

}  // namespace rolldisc::analytics
