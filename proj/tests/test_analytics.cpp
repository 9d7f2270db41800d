#include <doctest.h>

#include "rolldisc/analytics.hpp"
#include "rolldisc/error.hpp"

#include <cmath>
#include <numbers>

using namespace rolldisc;
using namespace rolldisc::analytics;
constexpr double pi = std::numbers::pi;

namespace {

// Direct transcriptions of the density formulas, independent of the
// factored representation used by the library.
double oracle_density(DensityKind kind, double w) {
  const double c2 = std::cos(w) * std::cos(w), s2 = std::sin(w) * std::sin(w);
  const double roll = std::sqrt(5 + 2 * s2) * std::sqrt(13 + 2 * c2);
  switch (kind) {
    case DensityKind::slide_hard: return std::sqrt(3 - 2 * c2) * std::sqrt(1 + 2 * c2);
    case DensityKind::roll_hard: return roll;
    case DensityKind::slide_vibr: return 1.0;
    case DensityKind::roll_vibr: return roll / std::sqrt((1 + 2 * c2) * (1 + 2 * s2));
  }
  return NAN;
}

double simpson(auto f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int k = 1; k < n; ++k) s += (k % 2 ? 4 : 2) * f(a + k * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("density plug-in values") {
  CHECK(density(DensityKind::roll_hard, 0.0) == doctest::Approx(std::sqrt(75.0)).epsilon(1e-14));
  CHECK(density(DensityKind::roll_hard, pi / 2) == doctest::Approx(std::sqrt(91.0)).epsilon(1e-14));
  for (double w = 0.0; w <= pi; w += 0.1) {
    CHECK(density(DensityKind::slide_vibr, w) == 1.0);
    for (DensityKind k : kAllDensityKinds) {
      CHECK(density(k, w) == doctest::Approx(oracle_density(k, w)).epsilon(1e-13));
      CHECK(density(k, w) == doctest::Approx(density(k, pi - w)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(density(DensityKind::roll_hard, 0.1, Domain::physical()), ArgumentError);
  CHECK_THROWS_AS(density(DensityKind::roll_hard, -0.1), ArgumentError);
}

TEST_CASE("rolling density is the inverse alpha product") {
  const auto inv = CosSquaredProduct::inverse_alpha_product();
  const double ratio0 = density(DensityKind::roll_hard, 0.0) / inv.value(0.0);
  for (double w = 0.0; w <= pi; w += 0.05) {
    CHECK(density(DensityKind::roll_hard, w) / inv.value(w) == doctest::Approx(ratio0).epsilon(1e-12));
    // (2/3)(13 + 2 cos^2) = K^2 + 8 and (2/3)(5 + 2 sin^2) = L^2 + 8/3.
    const double c2 = std::cos(w) * std::cos(w), s2 = 1 - c2;
    CHECK(std::abs(2.0 / 3 * (13 + 2 * c2) - (overdamped::K2(w) + 8)) < 1e-12);
    CHECK(std::abs(2.0 / 3 * (5 + 2 * s2) - (overdamped::L2(w) + 8.0 / 3)) < 1e-12);
  }
}

TEST_CASE("normalisation and CDF") {
  for (Domain dom : {Domain::full(), Domain::physical()}) {
    for (DensityKind k : kAllDensityKinds) {
      const DensityModel m(k, dom);
      const double z = simpson([&](double w) { return oracle_density(k, w); }, dom.lo, dom.hi);
      CHECK(m.normalization() == doctest::Approx(z).epsilon(1e-11));
      CHECK(integrate_density(m, dom.lo, dom.hi) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(m.cdf(dom.lo) == 0.0);
      CHECK(m.cdf(dom.hi) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(m.cdf(0.5 * (dom.lo + dom.hi)) == doctest::Approx(0.5).epsilon(1e-12));
      for (double p : {0.01, 0.2, 0.77, 0.999}) {
        CHECK(m.cdf(m.quantile(p)) == doctest::Approx(p).epsilon(1e-10));
      }
      std::vector<double> xs;
      for (int i = 0; i <= 40; ++i) xs.push_back(dom.lo + (dom.hi - dom.lo) * i / 40);
      const auto F = m.cdf_sorted(xs);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(F[i] == doctest::Approx(m.cdf(xs[i])).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("Fixman factor") {
  CHECK(fixman_factor(0.0) / fixman_factor(pi / 4) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-12));
  const double k = fixman_factor(0.3) / fixman_closed_form(0.3);
  const double r = density(DensityKind::roll_vibr, 0.3) /
                   (density(DensityKind::roll_hard, 0.3) * fixman_factor(0.3));
  for (double w = 0.01; w < pi; w += 0.07) {
    CHECK(fixman_factor(w) / fixman_closed_form(w) == doctest::Approx(k).epsilon(1e-12));
    CHECK(fixman_factor(w) == doctest::Approx(fixman_factor(pi - w)).epsilon(1e-12));
    CHECK(density(DensityKind::roll_vibr, w) /
              (density(DensityKind::roll_hard, w) * fixman_factor(w)) ==
          doctest::Approx(r).epsilon(1e-10));
    // The vibrational sliding law is flat: slide_hard is exactly 1 / fixman.
    CHECK(density(DensityKind::slide_hard, w) * fixman_closed_form(w) ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("Fokker-Planck residual") {
  const auto roll = CosSquaredProduct::of(DensityKind::roll_hard);
  double worst = 0.0, worst_flux = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double w = pi * i / 999;
    worst = std::max(worst, std::abs(fp_residual(roll, w)));
    worst_flux = std::max(worst_flux, std::abs(fp_flux(roll, w)));
  }
  CHECK(worst < 1e-10);
  CHECK(worst_flux < 1e-10);

  // Regression values from a 40-digit oracle differentiating the flux.
  const auto flat = CosSquaredProduct::constant();
  CHECK(fp_residual(flat, 0.3) == doctest::Approx(-0.018854168504897866).epsilon(1e-10));
  CHECK(fp_residual(flat, 0.7) == doctest::Approx(0.0019753239847494057).epsilon(1e-9));
  CHECK(fp_residual(flat, 1.2) == doctest::Approx(0.014472582026521154).epsilon(1e-10));
  const auto slide = CosSquaredProduct::of(DensityKind::slide_hard);
  CHECK(fp_residual(slide, 0.3) == doctest::Approx(0.017499832741614898).epsilon(1e-10));
  CHECK(fp_residual(slide, 0.7) == doctest::Approx(-0.098891369516757941).epsilon(1e-10));

  // Nested differences at h = 1e-6 carry roughly eps / h^2 of rounding.
  for (double w = 0.1; w < pi; w += 0.3) {
    for (const auto* d : {&roll, &flat, &slide}) {
      CHECK(std::abs(fp_residual(*d, w) - fp_residual_fd(*d, w)) < 1e-4);
    }
  }
}

TEST_CASE("subspace overlap") {
  const auto mid = subspace_overlap(pi / 2);
  CHECK(mid.closed_form == doctest::Approx(1.0 / std::sqrt(26.0 / 3 * 14.0 / 3)).epsilon(1e-14));
  CHECK(mid.closed_form == doctest::Approx(0.1573).epsilon(1e-3));
  for (double w = 0.05; w < pi; w += 0.1) {
    const auto o = subspace_overlap(w);
    CHECK(std::abs(o.normalized - o.closed_form) < 1e-10);
    CHECK(std::abs(o.normalized - subspace_overlap(pi - w).normalized) < 1e-12);
    // The raw singular product is the ratio of the two hard densities.
    const double ratio = density(DensityKind::slide_hard, w) / density(DensityKind::roll_hard, w);
    const double ratio0 = density(DensityKind::slide_hard, 1.0) / density(DensityKind::roll_hard, 1.0);
    CHECK(o.singular_product / subspace_overlap(1.0).singular_product ==
          doctest::Approx(ratio / ratio0).epsilon(1e-10));
    const auto s = subspace_overlap(w, ConstraintMode::slide);
    CHECK(std::abs(s.normalized - 1.0) < 1e-12);
  }
}

TEST_CASE("geometry tables and conserved quantities") {
  const GeometryTables g;
  CHECK(g.max_normal_tangent_product() == 0);
  for (const auto* n : {&g.N1, &g.N2}) {
    for (const auto* t : {&g.T_omega, &g.T_phi, &g.T_r}) CHECK(dot(*n, *t) == 0);
  }
  CHECK(dot(g.N1, g.N1) == 18);

  overdamped::ReducedState s;
  s.omega = 0.0;
  const auto q0 = conserved_quantities(s);
  CHECK(q0.Q1 == 0.0);
  CHECK(q0.Q2 == 0.0);
  s.omega = 1.0;
  s.theta << -2, 0, 2;
  const auto q1 = conserved_quantities(s);
  CHECK(q1.Q1 == 0.0);
  CHECK(q1.Q2 == 0.0);
  s.omega = -4.0;
  s.phi = 0.0;
  s.theta << -1, 0, 1;
  CHECK(conserved_quantities(s).Q1 == 18.0);
}

TEST_CASE("tangent map") {
  const auto mid = tangent_map_check(pi / 2, 0.0);
  CHECK(mid.passed());
  CHECK(mid.t_r_position_norm == 0.0);
  for (double c : mid.proportionality) CHECK(c > 0.0);
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 8; ++j) {
      const auto r = tangent_map_check(0.05 + (pi - 0.1) * i / 19, 2 * pi * j / 8);
      CHECK(r.passed());
      for (double a : r.angle) CHECK(a < 1e-10);
    }
  }
  Vec9 a = Vec9::Zero(), b = Vec9::Zero();
  a[0] = 1;
  b[0] = 1;
  b[1] = 1e-9;
  CHECK(vector_angle(a, b) == doctest::Approx(1e-9).epsilon(1e-6));
}

TEST_CASE("tail probabilities") {
  const Domain phys = Domain::physical();
  CHECK(tail_probability(DensityKind::slide_vibr, pi / 2, phys) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tail_probability(DensityKind::roll_hard, phys.lo, phys) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tail_probability(DensityKind::roll_hard, 0.0, Domain::full()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(tail_probability(DensityKind::roll_hard, 0.2, phys), ArgumentError);
  CHECK_THROWS_AS(tail_probability(DensityKind::roll_hard, 3.5, Domain::full()), ArgumentError);

  struct Frozen {
    DensityKind kind;
    AngleVariable var;
    bool physical;
    double value;
  };
  using K = DensityKind;
  using V = AngleVariable;
  // 30-digit quadrature of the direct formulas.
  const Frozen table[] = {
      {K::slide_hard, V::omega, false, 0.30300628088477087},
      {K::slide_hard, V::omega, true, 0.20878516037288533},
      {K::slide_hard, V::two_omega, false, 0.64446333760363301},
      {K::slide_hard, V::two_omega, true, 0.71355943672311421},
      {K::slide_hard, V::internal_angle, false, 0.28892667520726601},
      {K::slide_hard, V::internal_angle, true, 0.42711887344622843},
      {K::roll_hard, V::omega, false, 0.29261058405936282},
      {K::roll_hard, V::omega, true, 0.19519656626387872},
      {K::roll_hard, V::two_omega, false, 0.65577217396772759},
      {K::roll_hard, V::two_omega, true, 0.72894077448723026},
      {K::roll_hard, V::internal_angle, false, 0.31154434793545518},
      {K::roll_hard, V::internal_angle, true, 0.45788154897446052},
      {K::slide_vibr, V::omega, false, 0.29971825039566047},
      {K::slide_vibr, V::omega, true, 0.1995773755934907},
      {K::slide_vibr, V::two_omega, false, 0.64985912519783023},
      {K::slide_vibr, V::two_omega, true, 0.72478868779674535},
      {K::slide_vibr, V::internal_angle, false, 0.29971825039566047},
      {K::slide_vibr, V::internal_angle, true, 0.4495773755934907},
      {K::roll_vibr, V::omega, false, 0.2891963859587505},
      {K::roll_vibr, V::omega, true, 0.1859450811036058},
      {K::roll_vibr, V::two_omega, false, 0.66137257773796069},
      {K::roll_vibr, V::two_omega, true, 0.74041263260164227},
      {K::roll_vibr, V::internal_angle, false, 0.32274515547592138},
      {K::roll_vibr, V::internal_angle, true, 0.48082526520328454},
  };
  const auto rows = tail_sweep(2.2);
  CHECK(rows.size() == 24);
  int matched = 0;
  for (const Frozen& f : table) {
    const Domain dom = f.physical ? phys : Domain::full();
    CHECK(tail_probability(f.kind, 2.2, dom, f.var) == doctest::Approx(f.value).epsilon(1e-10));
    for (const TailRow& r : rows) {
      if (r.kind == f.kind && r.variable == f.var && r.domain == dom) {
        CHECK(r.probability == doctest::Approx(f.value).epsilon(1e-10));
        matched += r.matches;
      }
    }
  }
  // Only the two vibrational laws on the physical domain, read as the
  // unsigned internal angle, land within 0.01 of the quoted values.
  CHECK(matched == 2);
}
