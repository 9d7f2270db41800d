// Command-line front end: simulate, verify, density-table, tail-sweep.

#include "rolldisc/app/experiment.hpp"
#include "rolldisc/app/output.hpp"
#include "rolldisc/app/parallel.hpp"
#include "rolldisc/app/verify.hpp"
#include "rolldisc/error.hpp"
#include "rolldisc/kernels.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <cstdio>
#include <filesystem>
#include <iostream>

namespace {

using namespace rolldisc;
using nlohmann::ordered_json;

int emit_error(std::string_view kind, const std::string& message, ordered_json extra = {}) {
  ordered_json e{{"kind", kind}, {"message", message}};
  for (auto& [k, v] : extra.items()) e[k] = v;
  std::cerr << ordered_json{{"error", e}}.dump() << "\n";
  if (kind == "argument") return 2;
  if (kind == "precondition") return 3;
  if (kind == "numerical_rank") return 4;
  if (kind == "convergence") return 5;
  return 1;
}

struct SimulateArgs {
  app::ExperimentSpec spec;
  std::string engine = "langevin", mode = "slide", bonds = "hard", scheme = "stratonovich",
              boundary = "periodic", domain = "full", out;
  double beta = std::numeric_limits<double>::quiet_NaN();
  bool svg = false, no_trajectory = false;
};

void add_config(CLI::App* sub) {
  // Consumed by expand_config before CLI11 sees the arguments; declared so
  // that it shows up in --help.
  sub->add_option("--config", "Flat 'key = value' file; flags given on the command line win");
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// Turns `--config FILE` into `--key=value` tokens placed before the explicit
// flags, skipping keys that are also given on the command line.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  auto it = std::find_if(args.begin(), args.end(), [](const std::string& a) {
    return a == "--config" || a.rfind("--config=", 0) == 0;
  });
  if (it == args.end()) return args;
  std::string path;
  if (*it == "--config") {
    if (std::next(it) == args.end()) throw ArgumentError("--config needs a file name");
    path = *std::next(it);
    it = args.erase(it, std::next(it, 2));
  } else {
    path = it->substr(9);
    it = args.erase(it);
  }
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot read config file '" + path + "'");
  auto given = [&](const std::string& key) {
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == "--" + key || a.rfind("--" + key + "=", 0) == 0;
    });
  };
  std::vector<std::string> tokens;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line.substr(0, line.find('#')));
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError(fmt::format("{}:{}: expected 'key = value'", path, lineno));
    }
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    std::replace(key.begin(), key.end(), '_', '-');
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    if (key.empty()) throw ArgumentError(fmt::format("{}:{}: empty key", path, lineno));
    if (!given(key)) tokens.push_back("--" + key + "=" + value);
  }
  // Config tokens go right after the subcommand name.
  const auto sub = std::find_if(args.begin() + 1, args.end(), [](const std::string& a) {
    return !a.empty() && a[0] != '-';
  });
  const auto pos = sub == args.end() ? args.end() : std::next(sub);
  args.insert(pos, tokens.begin(), tokens.end());
  return args;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Constrained stochastic dynamics of a trimer of rolling or sliding discs"};
  cli.require_subcommand(1);

  SimulateArgs sa;
  auto* sim = cli.add_subcommand("simulate", "Run an ensemble and compare the half-angle marginal with the analytic density");
  add_config(sim);
  sim->add_option("--engine", sa.engine, "langevin | overdamped | reduced")->capture_default_str();
  sim->add_option("--mode", sa.mode, "slide | roll")->capture_default_str();
  sim->add_option("--bonds", sa.bonds, "hard | soft")->capture_default_str();
  sim->add_option("--stiffness", sa.spec.sim.stiffness, "Spring constant k of soft bonds")->capture_default_str();
  sim->add_option("--mass", sa.spec.sim.mass)->capture_default_str();
  sim->add_option("--gamma", sa.spec.sim.gamma, "Friction")->capture_default_str();
  sim->add_option("--sigma", sa.spec.sim.sigma, "Noise amplitude")->capture_default_str();
  sim->add_option("--beta", sa.beta, "Inverse temperature (default 2 gamma / sigma^2)");
  sim->add_option("--dt", sa.spec.sim.dt)->capture_default_str();
  sim->add_option("--tmax", sa.spec.tmax, "Simulated time per trajectory")->capture_default_str();
  sim->add_option("--burn-in", sa.spec.burn_in, "Time before sampling starts")->capture_default_str();
  sim->add_option("--stride", sa.spec.record_stride, "Steps between recorded samples")->capture_default_str();
  sim->add_option("--trajectories", sa.spec.n_trajectories, "Independent trajectories")->capture_default_str();
  sim->add_option("--seed", sa.spec.sim.seed)->capture_default_str();
  sim->add_option("--omega0", sa.spec.omega0, "Initial half angle")->capture_default_str();
  sim->add_option("--phi0", sa.spec.phi0, "Initial orientation")->capture_default_str();
  sim->add_option("--scheme", sa.scheme, "Overdamped scheme: stratonovich | general")->capture_default_str();
  sim->add_option("--boundary", sa.boundary, "Reduced engine: periodic | reflect")->capture_default_str();
  sim->add_option("--domain", sa.domain, "full | physical")->capture_default_str();
  sim->add_option("--bins", sa.spec.bins)->capture_default_str();
  sim->add_option("--tail", sa.spec.tail_thresholds, "Tail thresholds on omega")->capture_default_str();
  sim->add_option("--well-k", sa.spec.well_k, "Depth of a cosine well on omega (general scheme)");
  sim->add_option("--well-omega0", sa.spec.well_omega0, "Centre of the well");
  sim->add_option("--projection-tol", sa.spec.sim.projection_tol)->capture_default_str();
  sim->add_option("--projection-max-iter", sa.spec.sim.projection_max_iter)->capture_default_str();
  sim->add_option("--out", sa.out, "Output directory for the artifacts");
  sim->add_flag("--svg", sa.svg, "Also write density.svg");
  sim->add_flag("--no-trajectory", sa.no_trajectory, "Skip trajectory.csv");

  std::string suite = "all", verify_out;
  std::uint64_t verify_seed = 1;
  auto* ver = cli.add_subcommand("verify", "Run invariant suites; exit 0 iff every check passes");
  add_config(ver);
  ver->add_option("--suite", suite, "projections | fokker_planck | geometry | covariance | densities | all")
      ->capture_default_str();
  ver->add_option("--seed", verify_seed)->capture_default_str();
  ver->add_option("--out", verify_out, "Directory for report.json");

  std::string table_domain = "full", table_out;
  int table_points = 181;
  auto* tab = cli.add_subcommand("density-table", "Normalised densities of every kind on a grid (CSV)");
  add_config(tab);
  tab->add_option("--domain", table_domain, "full | physical")->capture_default_str();
  tab->add_option("--points", table_points)->capture_default_str();
  tab->add_option("--out", table_out, "CSV file (default stdout)");

  double threshold = 2.2, tol = 0.01;
  std::string tail_format = "json", tail_out;
  auto* tail = cli.add_subcommand("tail-sweep", "Tail probabilities under every interpretation of the angle");
  add_config(tail);
  tail->add_option("--threshold", threshold)->capture_default_str();
  tail->add_option("--tol", tol, "Match tolerance against 0.48 / 0.45")->capture_default_str();
  tail->add_option("--format", tail_format, "json | csv")->capture_default_str();
  tail->add_option("--out", tail_out, "Output directory");

  try {
    std::vector<std::string> args(argv, argv + argc);
    args = expand_config(std::move(args));
    std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
    cli.parse(reversed);
  } catch (const rolldisc::Error& e) {
    return emit_error(e.kind(), e.what());
  } catch (const CLI::CallForHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return cli.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    return emit_error("argument", e.what());
  }

  try {
    if (sim->parsed()) {
      app::ExperimentSpec spec = sa.spec;
      spec.engine = app::parse_engine(sa.engine);
      spec.sim.constraint_mode = parse_constraint_mode(sa.mode);
      spec.sim.bond_mode = parse_bond_mode(sa.bonds);
      spec.scheme = app::parse_scheme(sa.scheme);
      spec.boundary = app::parse_boundary(sa.boundary);
      spec.domain = app::parse_domain(sa.domain);
      spec.sim.beta = sa.beta;
      spec.keep_trajectory = !sa.no_trajectory && !sa.out.empty();
      spec.validate();
      const auto t0 = std::chrono::steady_clock::now();
      const app::RunResult r = app::run(spec);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (!sa.out.empty()) app::write_artifacts(sa.out, spec, r, sa.svg);
      std::cout << app::make_report(spec, r).dump(2) << "\n";
      std::cerr << fmt::format("simulate: {} samples, KS {:.4g}, {:.2f} s on {} thread(s), {} kernels\n",
                               r.histogram.n_samples, r.histogram.ks_statistic, secs,
                               app::thread_limit(), kernels::to_string(kernels::active_isa()));
      return r.invariants_passed() ? 0 : 1;
    }
    if (ver->parsed()) {
      const auto results = app::verify(suite, verify_seed);
      ordered_json suites = ordered_json::array();
      bool ok = true;
      for (const auto& s : results) {
        suites.push_back(app::to_json(s));
        ok = ok && s.passed();
        std::cerr << fmt::format("verify {:<14} {}  ({:.2f} s)\n", s.suite, s.passed() ? "PASS" : "FAIL", s.seconds);
      }
      const ordered_json report{{"schema_version", app::kSchemaVersion},
                                {"command", "verify"},
                                {"suite", suite},
                                {"passed", ok},
                                {"suites", suites}};
      if (!verify_out.empty()) {
        std::filesystem::create_directories(verify_out);
        app::write_json(std::filesystem::path(verify_out) / "report.json", report);
      }
      std::cout << report.dump(2) << "\n";
      return ok ? 0 : 1;
    }
    if (tab->parsed()) {
      const auto dom = app::parse_domain(table_domain) == app::DomainChoice::physical
                           ? analytics::Domain::physical()
                           : analytics::Domain::full();
      const std::string csv = app::density_table_csv(dom, table_points);
      if (table_out.empty()) {
        std::cout << csv;
      } else {
        app::write_text(table_out, csv);
      }
      return 0;
    }
    if (tail->parsed()) {
      if (tail_format != "json" && tail_format != "csv") {
        throw ArgumentError("format must be json or csv");
      }
      const ordered_json j = app::tail_sweep_json(threshold, tol);
      const std::string text = tail_format == "json" ? j.dump(2) + "\n" : app::tail_sweep_csv(threshold, tol);
      if (!tail_out.empty()) {
        std::filesystem::create_directories(tail_out);
        app::write_json(std::filesystem::path(tail_out) / "tail_sweep.json", j);
        app::write_text(std::filesystem::path(tail_out) / "tail_sweep.csv", app::tail_sweep_csv(threshold, tol));
      }
      std::cout << text;
      return 0;
    }
  } catch (const ConvergenceError& e) {
    return emit_error(e.kind(), e.what(), {{"iterations", e.iterations()}, {"residual", e.residual()}});
  } catch (const NumericalRankError& e) {
    return emit_error(e.kind(), e.what(), {{"condition", e.condition()}});
  } catch (const Error& e) {
    return emit_error(e.kind(), e.what());
  } catch (const std::exception& e) {
    return emit_error("internal", e.what());
  }
  return 0;
}
