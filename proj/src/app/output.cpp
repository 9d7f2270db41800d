#include "rolldisc/app/output.hpp"

#include "rolldisc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>

namespace rolldisc::app {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  return fmt::format("{:.17g}", v);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw PreconditionError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw PreconditionError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j) {
  write_text(path, j.dump(2) + "\n");
}

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows) {
  std::string out = "t,omega,phi,theta1,theta2,theta3,Q1,Q2\n";
  for (const auto& r : rows) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{},{}\n", format_number(r.t),
                   format_number(r.omega), format_number(r.phi), format_number(r.theta1),
                   format_number(r.theta2), format_number(r.theta3), format_number(r.Q1),
                   format_number(r.Q2));
  }
  return out;
}

std::string histogram_csv(const stats::HistogramReport& h, const analytics::DensityModel& model) {
  std::string out = "bin_center,empirical_density,model_density\n";
  const double n = static_cast<double>(h.n_samples);
  for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
    const double lo = h.bin_edges[b], hi = h.bin_edges[b + 1];
    const double c = 0.5 * (lo + hi);
    const double emp = n > 0 ? static_cast<double>(h.counts[b]) / (n * (hi - lo)) : 0.0;
    fmt::format_to(std::back_inserter(out), "{},{},{}\n", format_number(c), format_number(emp),
                   format_number(model.pdf(c)));
  }
  return out;
}

std::string density_svg(const stats::HistogramReport& h, const analytics::DensityModel& model,
                        const std::string& title) {
  const double W = 640, H = 420, L = 60, R = 20, T = 40, B = 50;
  const double x0 = model.domain().lo, x1 = model.domain().hi;
  const double n = static_cast<double>(std::max<std::int64_t>(h.n_samples, 1));
  std::vector<std::pair<double, double>> marks;
  double ymax = 0.0;
  for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
    const double w = h.bin_edges[b + 1] - h.bin_edges[b];
    const double y = static_cast<double>(h.counts[b]) / (n * w);
    marks.emplace_back(0.5 * (h.bin_edges[b] + h.bin_edges[b + 1]), y);
    ymax = std::max(ymax, y);
  }
  std::vector<std::pair<double, double>> curve;
  for (int i = 0; i <= 200; ++i) {
    const double x = x0 + (x1 - x0) * i / 200;
    curve.emplace_back(x, model.pdf(x));
    ymax = std::max(ymax, curve.back().second);
  }
  ymax *= 1.1;
  auto px = [&](double x) { return L + (W - L - R) * (x - x0) / (x1 - x0); };
  auto py = [&](double y) { return H - B - (H - T - B) * y / ymax; };

  std::string s = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
      W, H, W, H, L, title);
  fmt::format_to(std::back_inserter(s),
                 "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
                 "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"black\"/>\n",
                 L, H - B, W - R, T);
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4, y = ymax * i / 4;
    fmt::format_to(std::back_inserter(s),
                   "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                   "text-anchor=\"middle\">{:.3f}</text>\n",
                   px(x), H - B + 18, x);
    fmt::format_to(std::back_inserter(s),
                   "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
                   "text-anchor=\"end\">{:.3f}</text>\n",
                   L - 6, py(y) + 4, y);
  }
  fmt::format_to(std::back_inserter(s),
                 "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
                 "text-anchor=\"middle\">omega</text>\n",
                 0.5 * (L + W - R), H - 12);
  s += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& [x, y] : curve) fmt::format_to(std::back_inserter(s), "{:.2f},{:.2f} ", px(x), py(y));
  s += "\"/>\n";
  for (const auto& [x, y] : marks) {
    fmt::format_to(std::back_inserter(s),
                   "<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"3\" fill=\"#d62728\"/>\n", px(x), py(y));
  }
  s += "</svg>\n";
  return s;
}

std::string density_table_csv(analytics::Domain domain, int points) {
  if (points < 2) throw ArgumentError("density table needs at least two points");
  std::vector<analytics::DensityModel> models;
  std::string out = "omega";
  for (auto k : analytics::kAllDensityKinds) {
    models.emplace_back(k, domain);
    out += fmt::format(",{}", analytics::to_string(k));
  }
  out += "\n";
  for (int i = 0; i < points; ++i) {
    const double w = domain.lo + (domain.hi - domain.lo) * i / (points - 1);
    out += format_number(w);
    for (const auto& m : models) out += "," + format_number(m.pdf(w));
    out += "\n";
  }
  return out;
}

nlohmann::ordered_json tail_sweep_json(double threshold, double tol) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  bool any = false;
  for (const auto& r : analytics::tail_sweep(threshold, tol)) {
    nlohmann::ordered_json row{{"density", analytics::to_string(r.kind)},
                               {"variable", analytics::to_string(r.variable)},
                               {"domain", r.domain_name},
                               {"threshold", r.threshold}};
    row["probability"] = std::isnan(r.probability) ? nlohmann::ordered_json(nullptr)
                                                   : nlohmann::ordered_json(r.probability);
    row["target"] = r.target;
    row["matches"] = r.matches;
    any = any || r.matches;
    rows.push_back(row);
  }
  return {{"schema_version", kSchemaVersion},
          {"command", "tail-sweep"},
          {"threshold", threshold},
          {"match_tolerance", tol},
          {"targets", {{"roll", 0.48}, {"slide", 0.45}}},
          {"any_match", any},
          {"rows", rows}};
}

std::string tail_sweep_csv(double threshold, double tol) {
  std::string out = "density,variable,domain,threshold,probability,target,matches\n";
  for (const auto& r : analytics::tail_sweep(threshold, tol)) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{}\n", analytics::to_string(r.kind),
                   analytics::to_string(r.variable), r.domain_name, format_number(r.threshold),
                   format_number(r.probability), format_number(r.target), r.matches ? 1 : 0);
  }
  return out;
}

void write_artifacts(const std::filesystem::path& dir, const ExperimentSpec& spec,
                     const RunResult& result, bool svg) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw PreconditionError("cannot create output directory '" + dir.string() + "': " + ec.message());
  const analytics::DensityModel model(spec.reference_kind(), spec.model_domain());
  if (spec.keep_trajectory) write_text(dir / "trajectory.csv", trajectory_csv(result.trajectory));
  write_text(dir / "histogram.csv", histogram_csv(result.histogram, model));
  write_json(dir / "report.json", make_report(spec, result));
  if (svg) {
    const std::string title =
        fmt::format("{} / {} / {} bonds: empirical vs {}", to_string(spec.engine),
                    rolldisc::to_string(spec.sim.constraint_mode),
                    rolldisc::to_string(spec.sim.bond_mode), model.id());
    write_text(dir / "density.svg", density_svg(result.histogram, model, title));
  }
}

}  // namespace rolldisc::app
