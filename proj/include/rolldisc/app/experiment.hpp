#pragma once

// Experiment runner shared by the command-line tool and the acceptance
// suite: engine selection, ensembles of independent trajectories, sampling
// of the half angle and the JSON report.

#include "rolldisc/analytics.hpp"
#include "rolldisc/dynamics_full.hpp"
#include "rolldisc/overdamped.hpp"
#include "rolldisc/stats.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace rolldisc::app {

inline constexpr int kSchemaVersion = 1;

enum class Engine { langevin, overdamped, reduced };
/// Overdamped Cartesian scheme: projected-noise Stratonovich or the general
/// Ito form with friction tensor and divergence drift.
enum class Scheme { stratonovich, general };
enum class DomainChoice { full, physical };

std::string_view to_string(Engine e);
std::string_view to_string(Scheme s);
std::string_view to_string(DomainChoice d);
Engine parse_engine(std::string_view text);
Scheme parse_scheme(std::string_view text);
DomainChoice parse_domain(std::string_view text);
overdamped::OmegaBoundary parse_boundary(std::string_view text);
std::string_view to_string(overdamped::OmegaBoundary b);

struct ExperimentSpec {
  Engine engine = Engine::langevin;
  /// mass, gamma, sigma, beta, dt, seed, constraint and bond modes, stiffness.
  langevin::SimParams sim;
  double tmax = 100.0;
  /// Samples are taken only once t >= burn_in.
  double burn_in = 0.0;
  int record_stride = 100;
  int n_trajectories = 1;
  double omega0 = 1.5707963267948966;
  double phi0 = 0.0;
  Scheme scheme = Scheme::stratonovich;
  overdamped::OmegaBoundary boundary = overdamped::OmegaBoundary::periodic;
  DomainChoice domain = DomainChoice::full;
  /// Optional cosine well on the half angle for the general scheme.
  double well_k = 0.0;
  double well_omega0 = 1.5707963267948966;
  int bins = 60;
  std::vector<double> tail_thresholds{2.2};
  bool keep_trajectory = true;

  std::int64_t n_steps() const;
  analytics::Domain model_domain() const;
  analytics::DensityKind reference_kind() const;
  /// Throws ArgumentError on inconsistent settings.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct TrajectoryRow {
  double t, omega, phi, theta1, theta2, theta3, Q1, Q2;
};

struct InvariantCheck {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct RunResult {
  /// Half angles in [0, pi) inside the active domain, trajectory-major.
  std::vector<double> samples;
  std::int64_t truncated = 0;
  /// First trajectory on the lifted chart, every record_stride steps.
  std::vector<TrajectoryRow> trajectory;
  std::vector<InvariantCheck> invariants;
  stats::HistogramReport histogram;
  double lag1_autocorrelation = 0.0;
  double effective_sample_size = 0.0;
  /// Largest |Q - Q(0)| over record points and trajectories.
  double q1_drift = 0.0;
  double q2_drift = 0.0;

  bool invariants_passed() const;
};

/// Runs every trajectory (in parallel up to ROLLDISC_THREADS) and summarises
/// the samples against the reference density. Deterministic in the seed and
/// independent of the thread count.
RunResult run(const ExperimentSpec& spec);

/// Half-angle samples only; skips the histogram and KS summary. Optionally
/// reports the largest drift of Q1 and Q2.
std::vector<double> sample_omega(const ExperimentSpec& spec, double* q1_drift = nullptr,
                                 double* q2_drift = nullptr);

nlohmann::ordered_json make_report(const ExperimentSpec& spec, const RunResult& result);

}  // namespace rolldisc::app
