#pragma once

// Artifact writers: CSV with 17 significant digits, JSON and a
// self-contained SVG density plot.

#include "rolldisc/analytics.hpp"
#include "rolldisc/app/experiment.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace rolldisc::app {

/// Shortest form is not used on purpose: every value carries 17 digits.
std::string format_number(double v);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::ordered_json& j);

std::string trajectory_csv(const std::vector<TrajectoryRow>& rows);
/// bin_center, empirical_density, model_density
std::string histogram_csv(const stats::HistogramReport& h, const analytics::DensityModel& model);
/// Empirical markers over the analytic curve.
std::string density_svg(const stats::HistogramReport& h, const analytics::DensityModel& model,
                        const std::string& title);

/// omega followed by the normalised density of every kind on the domain.
std::string density_table_csv(analytics::Domain domain, int points);

nlohmann::ordered_json tail_sweep_json(double threshold, double tol);
std::string tail_sweep_csv(double threshold, double tol);

/// Writes trajectory.csv, histogram.csv, report.json and optionally
/// density.svg into dir, creating it if needed.
void write_artifacts(const std::filesystem::path& dir, const ExperimentSpec& spec,
                     const RunResult& result, bool svg);

}  // namespace rolldisc::app
