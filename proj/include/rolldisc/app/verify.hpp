#pragma once

// Deterministic invariant suites over fixed grids.

#include <json.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace rolldisc::app {

struct CheckResult {
  std::string name;
  double value = 0.0;
  /// value must satisfy value < bound (or value > bound when `above`).
  double bound = 0.0;
  bool above = false;
  bool passed = false;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckResult> checks;
  double seconds = 0.0;

  bool passed() const;
};

inline constexpr std::string_view kSuites[] = {"projections", "fokker_planck", "geometry",
                                               "covariance", "densities"};

/// One of kSuites, or "all" for every suite in order.
std::vector<SuiteResult> verify(std::string_view suite, std::uint64_t seed = 1);

SuiteResult verify_projections();
SuiteResult verify_fokker_planck();
SuiteResult verify_geometry();
SuiteResult verify_covariance(std::uint64_t seed = 1);
SuiteResult verify_densities();

nlohmann::ordered_json to_json(const SuiteResult& r);

}  // namespace rolldisc::app
