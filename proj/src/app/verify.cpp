#include "rolldisc/app/verify.hpp"

#include "rolldisc/analytics.hpp"
#include "rolldisc/error.hpp"
#include "rolldisc/model.hpp"
#include "rolldisc/overdamped.hpp"
#include "rolldisc/stats.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <numbers>

namespace rolldisc::app {

namespace {

constexpr double kPi = std::numbers::pi;

CheckResult below(std::string name, double value, double bound) {
  return {std::move(name), value, bound, false, value < bound};
}

CheckResult above(std::string name, double value, double bound) {
  return {std::move(name), value, bound, true, value > bound};
}

template <class F>
SuiteResult timed(std::string name, F&& body) {
  const auto t0 = std::chrono::steady_clock::now();
  SuiteResult r;
  r.suite = std::move(name);
  body(r.checks);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

double max_abs(const auto& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

bool SuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

SuiteResult verify_projections() {
  return timed("projections", [](std::vector<CheckResult>& out) {
    for (ConstraintMode mode : {ConstraintMode::roll, ConstraintMode::slide}) {
      const auto cs = model::ConstraintSet::for_mode(mode);
      const double rank = mode == ConstraintMode::roll ? 3.0 : 5.0;
      double idem = 0, sym = 0, cp = 0, trace = 0;
      for (int i = 0; i < 50; ++i) {
        const double w = 0.02 + (kPi - 0.04) * i / 49;
        const auto b = model::assemble(overdamped::parameterize(w, 0.37 * i), cs);
        idem = std::max(idem, max_abs(b.P * b.P - b.P));
        sym = std::max(sym, max_abs(b.P - b.P.transpose()));
        cp = std::max(cp, max_abs(b.C * b.P));
        trace = std::max(trace, std::abs(b.P.trace() - rank));
      }
      const std::string m(to_string(mode));
      out.push_back(below(m + ".P2_minus_P", idem, 1e-12));
      out.push_back(below(m + ".P_minus_PT", sym, 1e-12));
      out.push_back(below(m + ".CP", cp, 1e-12));
      out.push_back(below(m + ".trace_error", trace, 1e-12));
    }
  });
}

SuiteResult verify_fokker_planck() {
  return timed("fokker_planck", [](std::vector<CheckResult>& out) {
    const auto roll = analytics::CosSquaredProduct::of(analytics::DensityKind::roll_hard);
    const auto flat = analytics::CosSquaredProduct::constant();
    const auto slide = analytics::CosSquaredProduct::of(analytics::DensityKind::slide_hard);
    double res = 0, flux = 0, res_flat = 0, res_slide = 0, fd_gap = 0;
    for (int i = 0; i < 1000; ++i) {
      const double w = kPi * i / 999;
      res = std::max(res, std::abs(analytics::fp_residual(roll, w)));
      flux = std::max(flux, std::abs(analytics::fp_flux(roll, w)));
      res_flat = std::max(res_flat, std::abs(analytics::fp_residual(flat, w)));
      res_slide = std::max(res_slide, std::abs(analytics::fp_residual(slide, w)));
      if (i % 50 == 25) {
        fd_gap = std::max(fd_gap, std::abs(analytics::fp_residual(roll, w) -
                                           analytics::fp_residual_fd(roll, w)));
      }
    }
    out.push_back(below("roll_hard.max_residual", res, 1e-10));
    out.push_back(below("roll_hard.max_flux", flux, 1e-10));
    out.push_back(above("constant.max_residual", res_flat, 1e-3));
    out.push_back(above("slide_hard.max_residual", res_slide, 1e-3));
    out.push_back(below("roll_hard.finite_difference_gap", fd_gap, 1e-4));
  });
}

SuiteResult verify_geometry() {
  return timed("geometry", [](std::vector<CheckResult>& out) {
    const analytics::GeometryTables g;
    out.push_back(below("max_abs_N_dot_T", static_cast<double>(g.max_normal_tangent_product()), 0.5));
    double angle = 0, cres = 0, lie = 0, tr = 0, prop_min = INFINITY;
    for (int i = 0; i < 20; ++i) {
      for (int j = 0; j < 8; ++j) {
        const auto r = analytics::tangent_map_check(0.05 + (kPi - 0.1) * i / 19, 2 * kPi * j / 8);
        for (int k = 0; k < 3; ++k) {
          angle = std::max(angle, r.angle[k]);
          prop_min = std::min(prop_min, r.proportionality[k]);
        }
        cres = std::max(cres, r.constraint_residual);
        lie = std::max(lie, r.lie_bracket_max);
        tr = std::max(tr, r.t_r_position_norm);
      }
    }
    out.push_back(below("tangent_map.max_angle_rad", angle, 1e-10));
    out.push_back(above("tangent_map.min_proportionality", prop_min, 0.0));
    out.push_back(below("tangent_map.rolling_residual", cres, 1e-10));
    out.push_back(below("tangent_map.lie_bracket_max", lie, 1e-300));
    out.push_back(below("tangent_map.t_r_position_norm", tr, 1e-300));
    double overlap = 0, sym = 0, slide = 0;
    for (int i = 0; i < 50; ++i) {
      const double w = 0.02 + (kPi - 0.04) * i / 49;
      const auto o = analytics::subspace_overlap(w);
      overlap = std::max(overlap, std::abs(o.normalized - o.closed_form));
      sym = std::max(sym, std::abs(o.normalized - analytics::subspace_overlap(kPi - w).normalized));
      slide = std::max(slide, std::abs(analytics::subspace_overlap(w, ConstraintMode::slide).normalized - 1));
    }
    out.push_back(below("overlap.closed_form_gap", overlap, 1e-10));
    out.push_back(below("overlap.reflection_asymmetry", sym, 1e-10));
    out.push_back(below("overlap.slide_minus_one", slide, 1e-10));
  });
}

SuiteResult verify_covariance(std::uint64_t seed) {
  return timed("covariance", [seed](std::vector<CheckResult>& out) {
    const auto cs = model::ConstraintSet::for_mode(ConstraintMode::roll);
    int idx = 0;
    for (double w : {kPi / 4, kPi / 2, 2.2}) {
      const auto b = model::assemble(overdamped::parameterize(w, 0.0), cs);
      Rng rng(seed, 1000 + idx++);
      const Mat9 cov = stats::velocity_covariance_oracle(b, 1.0, 1000000, rng);
      out.push_back(below(fmt::format("omega={:.6f}.max_abs_cov_minus_P", w), max_abs(cov - b.P), 5e-3));
    }
  });
}

SuiteResult verify_densities() {
  return timed("densities", [](std::vector<CheckResult>& out) {
    using analytics::DensityKind;
    for (const auto dom : {analytics::Domain::full(), analytics::Domain::physical()}) {
      const std::string dn = dom == analytics::Domain::full() ? "full" : "physical";
      for (DensityKind k : analytics::kAllDensityKinds) {
        const analytics::DensityModel m(k, dom);
        out.push_back(below(fmt::format("{}.{}.normalization_error", to_string(k), dn),
                            std::abs(analytics::integrate_density(m, dom.lo, dom.hi) - 1.0), 1e-10));
      }
    }
    double sym = 0, alpha = 0, fixman = 0;
    const auto inv = analytics::CosSquaredProduct::inverse_alpha_product();
    const double c_alpha = analytics::density(DensityKind::roll_hard, 1.0) / inv.value(1.0);
    const double c_fix = analytics::density(DensityKind::roll_vibr, 1.0) /
                         (analytics::density(DensityKind::roll_hard, 1.0) * analytics::fixman_factor(1.0));
    for (int i = 0; i < 200; ++i) {
      const double w = 0.01 + (kPi - 0.02) * i / 199;
      for (DensityKind k : analytics::kAllDensityKinds) {
        sym = std::max(sym, std::abs(analytics::density(k, w) / analytics::density(k, kPi - w) - 1));
      }
      alpha = std::max(alpha, std::abs(analytics::density(DensityKind::roll_hard, w) / inv.value(w) / c_alpha - 1));
      fixman = std::max(fixman, std::abs(analytics::density(DensityKind::roll_vibr, w) /
                                             (analytics::density(DensityKind::roll_hard, w) *
                                              analytics::fixman_factor(w)) / c_fix - 1));
    }
    out.push_back(below("reflection_asymmetry", sym, 1e-12));
    out.push_back(below("roll_hard_vs_inverse_alpha_product", alpha, 1e-12));
    out.push_back(below("roll_vibr_vs_roll_hard_times_fixman", fixman, 1e-10));
  });
}

std::vector<SuiteResult> verify(std::string_view suite, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  const bool all = suite == "all";
  bool known = all;
  for (std::string_view s : kSuites) known = known || s == suite;
  if (!known) throw ArgumentError(fmt::format("unknown suite '{}'", suite));
  if (all || suite == "projections") out.push_back(verify_projections());
  if (all || suite == "fokker_planck") out.push_back(verify_fokker_planck());
  if (all || suite == "geometry") out.push_back(verify_geometry());
  if (all || suite == "covariance") out.push_back(verify_covariance(seed));
  if (all || suite == "densities") out.push_back(verify_densities());
  return out;
}

nlohmann::ordered_json to_json(const SuiteResult& r) {
  nlohmann::ordered_json checks = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"value", c.value},
                      {c.above ? "must_exceed" : "must_be_below", c.bound},
                      {"passed", c.passed}});
  }
  return {{"suite", r.suite}, {"passed", r.passed()}, {"checks", checks}};
}

}  // namespace rolldisc::app
