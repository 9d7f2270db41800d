#pragma once

// Empirical distributions of the half angle: extraction from
// configurations, histograms, Kolmogorov-Smirnov statistics and the
// projected-velocity covariance oracle.

#include "rolldisc/analytics.hpp"
#include "rolldisc/model.hpp"
#include "rolldisc/rng.hpp"
#include "rolldisc/types.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace rolldisc::stats {

/// Half of the oriented angle from x1 - x2 to x3 - x2, in [0, pi).
double extract_omega(const Configuration& cfg);

/// Orientation of the x1 -> x3 axis, matching the phi of parameterize for
/// half angles in (0, pi).
double extract_phi(const Configuration& cfg);

/// Lifts (omega mod pi, phi) readings onto a continuous unbounded chart
/// using the identification (omega + pi, phi) ~ (omega, phi + pi).
class ChartLift {
 public:
  ChartLift(double omega0, double phi0) : omega_(omega0), phi_(phi0) {}

  /// Nearest lift of a raw reading to the previous point.
  void update(double omega_raw, double phi_raw);
  double omega() const { return omega_; }
  double phi() const { return phi_; }

 private:
  double omega_;
  double phi_;
};

class Histogram {
 public:
  Histogram(double lo, double hi, int bins = 60);

  void add(double value);
  void add(std::span<const double> values);
  /// Associative merge of a histogram with identical binning.
  void merge(const Histogram& other);

  int bins() const { return static_cast<int>(counts_.size()); }
  const std::vector<double>& edges() const { return edges_; }
  const std::vector<std::int64_t>& counts() const { return counts_; }
  std::int64_t n_samples() const { return n_; }
  /// Values that fell outside [lo, hi].
  std::int64_t rejected() const { return rejected_; }
  double center(int bin) const { return 0.5 * (edges_[bin] + edges_[bin + 1]); }
  /// counts / (n * width); integrates to one.
  double density(int bin) const;

 private:
  std::vector<double> edges_;
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
  std::int64_t rejected_ = 0;
};

/// sup |F_n - F| against the model CDF. Throws on empty input or samples
/// outside the model domain.
double ks_distance(std::span<const double> samples, const analytics::DensityModel& model);

/// P(sqrt(n) D > lambda) under the Kolmogorov limit law.
double kolmogorov_survival(double lambda);

struct TwoSampleKs {
  double statistic = 0.0;
  double p_value = 1.0;
  /// Rejection threshold for the statistic at the 1% level.
  double critical_1pct = 0.0;
  bool rejected_1pct = false;
};

TwoSampleKs two_sample_ks(std::span<const double> a, std::span<const double> b);

/// Sample covariance of n projected Gaussian velocities P z / sqrt(beta).
Mat9 velocity_covariance_oracle(const model::ProjectionBundle& bundle, double beta,
                                std::int64_t n, Rng& rng);

double lag1_autocorrelation(std::span<const double> series);

/// Effective number of independent samples from the integrated
/// autocorrelation time (initial positive sequence).
double effective_sample_size(std::span<const double> series);

struct HistogramReport {
  std::vector<double> bin_edges;
  std::vector<std::int64_t> counts;
  std::int64_t n_samples = 0;
  double ks_statistic = 0.0;
  std::string reference;
  std::map<double, double> tail_estimates;
};

HistogramReport make_report(std::span<const double> samples,
                            const analytics::DensityModel& model, int bins = 60,
                            std::span<const double> tail_thresholds = {});

}  // namespace rolldisc::stats
