#include "rolldisc/app/experiment.hpp"

#include "rolldisc/app/parallel.hpp"
#include "rolldisc/error.hpp"
#include "rolldisc/kernels.hpp"
#include "rolldisc/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>

namespace rolldisc::app {

namespace {

constexpr double kPi = std::numbers::pi;
// Lanes per task for the batched reduced engine; a multiple of the SIMD width.
constexpr std::size_t kLaneBlock = 16;

template <class E, std::size_t N>
E parse_named(std::string_view text, const std::array<std::pair<std::string_view, E>, N>& names,
              std::string_view what) {
  for (const auto& [name, value] : names) {
    if (name == text) return value;
  }
  throw ArgumentError(fmt::format("unknown {} '{}'", what, text));
}

constexpr std::array<std::pair<std::string_view, Engine>, 3> kEngines{
    {{"langevin", Engine::langevin}, {"overdamped", Engine::overdamped}, {"reduced", Engine::reduced}}};
constexpr std::array<std::pair<std::string_view, Scheme>, 2> kSchemes{
    {{"stratonovich", Scheme::stratonovich}, {"general", Scheme::general}}};
constexpr std::array<std::pair<std::string_view, DomainChoice>, 2> kDomains{
    {{"full", DomainChoice::full}, {"physical", DomainChoice::physical}}};
constexpr std::array<std::pair<std::string_view, overdamped::OmegaBoundary>, 2> kBoundaries{
    {{"periodic", overdamped::OmegaBoundary::periodic},
     {"reflect", overdamped::OmegaBoundary::reflect}}};

template <class E, std::size_t N>
std::string_view name_of(E value, const std::array<std::pair<std::string_view, E>, N>& names) {
  for (const auto& [name, v] : names) {
    if (v == value) return name;
  }
  return "?";
}

double wrap_half_angle(double omega) {
  double w = std::fmod(omega, kPi);
  if (w < 0.0) w += kPi;
  if (w >= kPi) w = 0.0;
  return w;
}

// Output of one trajectory (or one block of reduced lanes).
struct Chunk {
  std::vector<std::vector<double>> series;
  std::int64_t truncated = 0;
  std::vector<TrajectoryRow> rows;
  std::vector<double> invariant_max;
  /// Largest |Q1 - Q1(0)|, |Q2 - Q2(0)| seen at the record points.
  double q_drift[2] = {0.0, 0.0};

  void track_q(const TrajectoryRow& now, const TrajectoryRow& start) {
    q_drift[0] = std::max(q_drift[0], std::abs(now.Q1 - start.Q1));
    q_drift[1] = std::max(q_drift[1], std::abs(now.Q2 - start.Q2));
  }
};

struct Sampler {
  const ExperimentSpec& spec;
  analytics::Domain domain;
  std::int64_t burn_steps;

  explicit Sampler(const ExperimentSpec& s)
      : spec(s),
        domain(s.model_domain()),
        burn_steps(static_cast<std::int64_t>(std::ceil(s.burn_in / s.sim.dt - 1e-9))) {}

  void record(std::int64_t step, double omega_mod, std::vector<double>& out,
              std::int64_t& truncated) const {
    if (step < burn_steps) return;
    if (domain.contains(omega_mod, 0.0)) {
      out.push_back(omega_mod);
    } else {
      ++truncated;
    }
  }
};

TrajectoryRow make_row(double t, double omega, double phi, double th1, double th2, double th3) {
  overdamped::ReducedState rs;
  rs.omega = omega;
  rs.phi = phi;
  rs.theta << th1, th2, th3;
  const auto q = analytics::conserved_quantities(rs);
  return {t, omega, phi, th1, th2, th3, q.Q1, q.Q2};
}

TrajectoryRow row_from_configuration(double t, const stats::ChartLift& lift, const Configuration& q) {
  return make_row(t, lift.omega(), lift.phi(), q.spin(1), q.spin(2), q.spin(3));
}

std::vector<std::string> invariant_names(const ExperimentSpec& spec) {
  switch (spec.engine) {
    case Engine::langevin:
      if (spec.sim.bond_mode == BondMode::hard) {
        return {"holonomic_residual", "velocity_constraint_residual"};
      }
      return {"bond_length_deviation", "center_of_mass_residual"};
    case Engine::overdamped: return {"holonomic_residual"};
    case Engine::reduced:
      if (spec.sim.constraint_mode == ConstraintMode::roll &&
          spec.boundary == overdamped::OmegaBoundary::periodic) {
        return {"conserved_Q1_drift", "conserved_Q2_drift"};
      }
      return {};
  }
  return {};
}

std::vector<double> invariant_tolerances(const ExperimentSpec& spec) {
  switch (spec.engine) {
    case Engine::langevin:
      if (spec.sim.bond_mode == BondMode::hard) return {1e-9, 1e-9};
      // Thermal stretch of a k = 1e4 spring is ~0.007; 0.1 flags a blow-up.
      return {0.1, 1e-9};
    case Engine::overdamped: return {1e-9};
    case Engine::reduced: return {1e-6, 1e-6};
  }
  return {};
}

Chunk run_langevin(const ExperimentSpec& spec, std::size_t index) {
  const Sampler sampler(spec);
  const langevin::SimParams& p = spec.sim;
  const std::int64_t n = spec.n_steps();
  const auto vcs = p.velocity_constraints();
  const bool hard = p.bond_mode == BondMode::hard;
  const bool keep = spec.keep_trajectory && index == 0;

  Chunk out;
  out.series.resize(1);
  out.invariant_max.assign(2, 0.0);
  langevin::PhaseState s = langevin::initial_state(spec.omega0, spec.phi0);
  stats::ChartLift lift(spec.omega0, spec.phi0);
  const TrajectoryRow start = row_from_configuration(0.0, lift, s.q);
  if (keep) out.rows.push_back(start);
  Rng rng(p.seed, index);
  for (std::int64_t k = 1; k <= n; ++k) {
    langevin::step_inplace(s, p, rng);
    const double w = stats::extract_omega(s.q);
    lift.update(w, stats::extract_phi(s.q));
    if (k % spec.record_stride != 0) continue;
    sampler.record(k, w, out.series[0], out.truncated);
    if (hard) {
      out.invariant_max[0] =
          std::max(out.invariant_max[0], langevin::holonomic_residual(s.q).cwiseAbs().maxCoeff());
      out.invariant_max[1] = std::max(
          out.invariant_max[1], (model::constraint_matrix(s.q, vcs) * s.p).cwiseAbs().maxCoeff());
    } else {
      for (const Pair& pr : kTrimerPairs) {
        out.invariant_max[0] = std::max(out.invariant_max[0], std::abs(s.q.bond_length(pr) - 1.0));
      }
      out.invariant_max[1] = std::max(out.invariant_max[1], s.q.center_of_mass_sum().norm());
    }
    const TrajectoryRow row = row_from_configuration(k * p.dt, lift, s.q);
    out.track_q(row, start);
    if (keep) out.rows.push_back(row);
  }
  return out;
}

Chunk run_overdamped(const ExperimentSpec& spec, std::size_t index) {
  const Sampler sampler(spec);
  const std::int64_t n = spec.n_steps();
  const bool keep = spec.keep_trajectory && index == 0;
  const ConstraintMode mode = spec.sim.constraint_mode;

  overdamped::GeneralParams gp;
  std::unique_ptr<overdamped::Potential> well;
  if (spec.scheme == Scheme::general) {
    gp.gamma = spec.sim.gamma * Mat9::Identity();
    gp.beta = spec.sim.effective_beta();
    gp.dt = overdamped::general_time_step(spec.sim.dt, gp.beta);
    gp.mode = mode;
    if (spec.well_k > 0.0) {
      well = std::make_unique<overdamped::OmegaWell>(spec.well_omega0, spec.well_k);
      gp.potential = well.get();
    }
    gp.projection.projection_tol = spec.sim.projection_tol;
    gp.projection.projection_max_iter = spec.sim.projection_max_iter;
  }
  overdamped::CartesianOptions opt;
  opt.projection_tol = spec.sim.projection_tol;
  opt.projection_max_iter = spec.sim.projection_max_iter;

  Chunk out;
  out.series.resize(1);
  out.invariant_max.assign(1, 0.0);
  Configuration x = overdamped::parameterize(spec.omega0, spec.phi0);
  stats::ChartLift lift(spec.omega0, spec.phi0);
  const TrajectoryRow start = row_from_configuration(0.0, lift, x);
  if (keep) out.rows.push_back(start);
  Rng rng(spec.sim.seed, index);
  for (std::int64_t k = 1; k <= n; ++k) {
    x = spec.scheme == Scheme::general ? overdamped::step_cartesian_general(x, gp, rng)
                                       : overdamped::step_cartesian_strat(x, mode, spec.sim.dt, rng, opt);
    const double w = stats::extract_omega(x);
    lift.update(w, stats::extract_phi(x));
    if (k % spec.record_stride != 0) continue;
    sampler.record(k, w, out.series[0], out.truncated);
    out.invariant_max[0] =
        std::max(out.invariant_max[0], langevin::holonomic_residual(x).cwiseAbs().maxCoeff());
    const TrajectoryRow row = row_from_configuration(k * spec.sim.dt, lift, x);
    out.track_q(row, start);
    if (keep) out.rows.push_back(row);
  }
  return out;
}

Chunk run_reduced_block(const ExperimentSpec& spec, std::size_t begin, std::size_t end) {
  const Sampler sampler(spec);
  const std::int64_t n = spec.n_steps();
  const std::size_t lanes = end - begin;
  const bool track_q = spec.sim.constraint_mode == ConstraintMode::roll &&
                       spec.boundary == overdamped::OmegaBoundary::periodic;
  const bool keep = spec.keep_trajectory && begin == 0;

  kernels::ReducedEnsemble ens;
  ens.resize(lanes);
  for (std::size_t l = 0; l < lanes; ++l) {
    ens.omega[l] = spec.omega0;
    ens.phi[l] = spec.phi0;
    ens.theta1[l] = ens.theta2[l] = ens.theta3[l] = 0.0;
    ens.rng[l] = Rng(spec.sim.seed, begin + l);
  }
  kernels::ReducedParams rp;
  rp.roll = spec.sim.constraint_mode == ConstraintMode::roll;
  rp.dt = spec.sim.dt;
  rp.reflect = spec.boundary == overdamped::OmegaBoundary::reflect;
  const analytics::Domain phys = analytics::Domain::physical();
  rp.lo = phys.lo;
  rp.hi = phys.hi;

  auto q_of = [&](std::size_t l) {
    return make_row(0.0, ens.omega[l], ens.phi[l], ens.theta1[l], ens.theta2[l], ens.theta3[l]);
  };
  std::vector<TrajectoryRow> q0(lanes);
  for (std::size_t l = 0; l < lanes; ++l) q0[l] = q_of(l);

  Chunk out;
  out.series.resize(lanes);
  out.invariant_max.assign(track_q ? 2 : 0, 0.0);
  if (keep) out.rows.push_back(q0[0]);

  std::int64_t k = 0;
  while (k < n) {
    const std::int64_t chunk = std::min<std::int64_t>(spec.record_stride - k % spec.record_stride, n - k);
    kernels::advance_reduced(ens, rp, static_cast<std::size_t>(chunk));
    k += chunk;
    if (k % spec.record_stride != 0) continue;
    for (std::size_t l = 0; l < lanes; ++l) {
      sampler.record(k, wrap_half_angle(ens.omega[l]), out.series[l], out.truncated);
      out.track_q(q_of(l), q0[l]);
      if (track_q) {
        out.invariant_max[0] = out.q_drift[0];
        out.invariant_max[1] = out.q_drift[1];
      }
    }
    if (keep) {
      TrajectoryRow r = q_of(0);
      r.t = k * spec.sim.dt;
      out.rows.push_back(r);
    }
  }
  return out;
}

std::vector<Chunk> run_chunks(const ExperimentSpec& spec) {
  spec.validate();
  const std::size_t n_traj = static_cast<std::size_t>(spec.n_trajectories);
  std::vector<Chunk> chunks;
  if (spec.engine == Engine::reduced) {
    const std::size_t blocks = (n_traj + kLaneBlock - 1) / kLaneBlock;
    chunks.resize(blocks);
    parallel_for(blocks, [&](std::size_t b) {
      chunks[b] = run_reduced_block(spec, b * kLaneBlock, std::min(n_traj, (b + 1) * kLaneBlock));
    });
  } else {
    chunks.resize(n_traj);
    parallel_for(n_traj, [&](std::size_t i) {
      chunks[i] = spec.engine == Engine::langevin ? run_langevin(spec, i) : run_overdamped(spec, i);
    });
  }
  return chunks;
}

}  // namespace

std::string_view to_string(Engine e) { return name_of(e, kEngines); }
std::string_view to_string(Scheme s) { return name_of(s, kSchemes); }
std::string_view to_string(DomainChoice d) { return name_of(d, kDomains); }
std::string_view to_string(overdamped::OmegaBoundary b) { return name_of(b, kBoundaries); }
Engine parse_engine(std::string_view t) { return parse_named(t, kEngines, "engine"); }
Scheme parse_scheme(std::string_view t) { return parse_named(t, kSchemes, "scheme"); }
DomainChoice parse_domain(std::string_view t) { return parse_named(t, kDomains, "domain"); }
overdamped::OmegaBoundary parse_boundary(std::string_view t) {
  return parse_named(t, kBoundaries, "boundary");
}

std::int64_t ExperimentSpec::n_steps() const {
  return static_cast<std::int64_t>(std::llround(tmax / sim.dt));
}

analytics::Domain ExperimentSpec::model_domain() const {
  return domain == DomainChoice::physical ? analytics::Domain::physical() : analytics::Domain::full();
}

analytics::DensityKind ExperimentSpec::reference_kind() const {
  return sim.bond_mode == BondMode::soft ? analytics::vibr_kind(sim.constraint_mode)
                                         : analytics::hard_kind(sim.constraint_mode);
}

void ExperimentSpec::validate() const {
  if (engine != Engine::langevin && sim.bond_mode == BondMode::soft) {
    throw ArgumentError(fmt::format("engine '{}' presupposes hard bonds; soft bonds need the "
                                    "langevin engine",
                                    to_string(engine)));
  }
  if (!(sim.dt > 0.0)) throw ArgumentError("dt must be positive");
  if (!(tmax >= sim.dt)) throw ArgumentError("tmax must be at least one time step");
  if (!(burn_in >= 0.0) || !(burn_in <= tmax)) throw ArgumentError("burn_in must lie in [0, tmax]");
  if (record_stride < 1) throw ArgumentError("record_stride must be at least 1");
  if (n_trajectories < 1) throw ArgumentError("trajectories must be at least 1");
  if (bins < 1) throw ArgumentError("bins must be at least 1");
  if (!std::isfinite(omega0) || !std::isfinite(phi0)) throw ArgumentError("initial angles must be finite");
  if (boundary == overdamped::OmegaBoundary::reflect) {
    if (engine != Engine::reduced) throw ArgumentError("the reflecting boundary applies to the reduced engine only");
    if (!analytics::Domain::physical().contains(omega0, 0.0)) {
      throw ArgumentError("reflecting runs must start inside the physical domain");
    }
  }
  if (scheme == Scheme::general && engine != Engine::overdamped) {
    throw ArgumentError("scheme 'general' applies to the overdamped engine only");
  }
  if (well_k < 0.0) throw ArgumentError("well_k must be non-negative");
  if (well_k > 0.0 && scheme != Scheme::general) {
    throw ArgumentError("a potential well needs the overdamped general scheme");
  }
  for (double t : tail_thresholds) {
    if (!std::isfinite(t)) throw ArgumentError("tail thresholds must be finite");
  }
  if (engine == Engine::langevin) {
    langevin::SimParams check = sim;
    check.n_steps = n_steps();
    check.validate();
  } else if (scheme == Scheme::general && !(sim.effective_beta() > 0.0 && sim.gamma > 0.0)) {
    throw ArgumentError("the general scheme needs positive beta and gamma");
  }
}

nlohmann::ordered_json ExperimentSpec::to_json() const {
  nlohmann::ordered_json j;
  j["engine"] = to_string(engine);
  j["constraint_mode"] = rolldisc::to_string(sim.constraint_mode);
  j["bond_mode"] = rolldisc::to_string(sim.bond_mode);
  j["mass"] = sim.mass;
  j["gamma"] = sim.gamma;
  j["sigma"] = sim.sigma;
  j["beta"] = sim.effective_beta();
  j["dt"] = sim.dt;
  j["tmax"] = tmax;
  j["n_steps"] = n_steps();
  j["burn_in"] = burn_in;
  j["record_stride"] = record_stride;
  j["trajectories"] = n_trajectories;
  j["seed"] = sim.seed;
  j["stiffness"] = sim.stiffness;
  j["omega0"] = omega0;
  j["phi0"] = phi0;
  j["scheme"] = to_string(scheme);
  j["boundary"] = to_string(boundary);
  j["domain"] = to_string(domain);
  j["bins"] = bins;
  j["projection_tol"] = sim.projection_tol;
  j["projection_max_iter"] = sim.projection_max_iter;
  if (well_k > 0.0) {
    j["well_k"] = well_k;
    j["well_omega0"] = well_omega0;
  }
  return j;
}

bool RunResult::invariants_passed() const {
  return std::all_of(invariants.begin(), invariants.end(), [](const auto& c) { return c.passed; });
}

std::vector<double> sample_omega(const ExperimentSpec& spec, double* q1_drift, double* q2_drift) {
  std::vector<double> samples;
  double d1 = 0.0, d2 = 0.0;
  for (const Chunk& c : run_chunks(spec)) {
    for (const auto& s : c.series) samples.insert(samples.end(), s.begin(), s.end());
    d1 = std::max(d1, c.q_drift[0]);
    d2 = std::max(d2, c.q_drift[1]);
  }
  if (q1_drift != nullptr) *q1_drift = d1;
  if (q2_drift != nullptr) *q2_drift = d2;
  return samples;
}

RunResult run(const ExperimentSpec& spec) {
  std::vector<Chunk> chunks = run_chunks(spec);
  RunResult r;
  const auto names = invariant_names(spec);
  const auto tols = invariant_tolerances(spec);
  std::vector<double> worst(names.size(), 0.0);
  for (Chunk& c : chunks) {
    for (const auto& s : c.series) {
      r.samples.insert(r.samples.end(), s.begin(), s.end());
      if (s.size() >= 3) {
        r.effective_sample_size += stats::effective_sample_size(s);
      } else {
        r.effective_sample_size += static_cast<double>(s.size());
      }
    }
    r.truncated += c.truncated;
    r.q1_drift = std::max(r.q1_drift, c.q_drift[0]);
    r.q2_drift = std::max(r.q2_drift, c.q_drift[1]);
    for (std::size_t i = 0; i < worst.size(); ++i) worst[i] = std::max(worst[i], c.invariant_max[i]);
  }
  if (!chunks.empty()) {
    r.trajectory = std::move(chunks.front().rows);
    r.lag1_autocorrelation = stats::lag1_autocorrelation(chunks.front().series.front());
  }
  for (std::size_t i = 0; i < names.size(); ++i) {
    r.invariants.push_back({names[i], worst[i], tols[i], worst[i] <= tols[i]});
  }
  if (r.samples.empty()) {
    throw PreconditionError("no samples recorded: check tmax, burn_in, record_stride and domain");
  }
  const analytics::DensityModel model(spec.reference_kind(), spec.model_domain());
  r.histogram = stats::make_report(r.samples, model, spec.bins, spec.tail_thresholds);
  return r;
}

nlohmann::ordered_json make_report(const ExperimentSpec& spec, const RunResult& result) {
  using nlohmann::ordered_json;
  const analytics::DensityModel model(spec.reference_kind(), spec.model_domain());
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "simulate";
  j["params"] = spec.to_json();
  j["rng"] = {{"name", std::string(kRngName)}, {"version", kRngVersion}};
  j["samples"] = {{"count", result.histogram.n_samples},
                  {"truncated", result.truncated},
                  {"lag1_autocorrelation", result.lag1_autocorrelation},
                  {"effective_sample_size", result.effective_sample_size}};
  j["ks"] = {{"statistic", result.histogram.ks_statistic},
             {"reference", result.histogram.reference}};
  ordered_json tails = ordered_json::array();
  for (const auto& [t, p] : result.histogram.tail_estimates) {
    ordered_json row{{"threshold", t}, {"variable", "omega"}, {"empirical", p}};
    row["model"] = model.domain().contains(t, 0.0)
                       ? ordered_json(analytics::tail_probability(model.kind(), t, model.domain()))
                       : ordered_json(nullptr);
    tails.push_back(row);
  }
  j["tails"] = tails;
  ordered_json inv = ordered_json::array();
  for (const auto& c : result.invariants) {
    inv.push_back({{"name", c.name},
                   {"passed", c.passed},
                   {"max_residual", c.max_residual},
                   {"tolerance", c.tolerance}});
  }
  j["invariants"] = inv;
  j["invariants_passed"] = result.invariants_passed();
  // Exact in the continuum for rolling; a discretisation diagnostic here.
  if (spec.sim.constraint_mode == ConstraintMode::roll) {
    j["conserved_quantity_drift"] = {{"Q1", result.q1_drift}, {"Q2", result.q2_drift}};
  }
  return j;
}

}  // namespace rolldisc::app
