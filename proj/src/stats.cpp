#include "rolldisc/stats.hpp"

#include "rolldisc/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace rolldisc::stats {

double extract_omega(const Configuration& cfg) {
  const Vec2 a = cfg.position(1) - cfg.position(2);
  const Vec2 b = cfg.position(3) - cfg.position(2);
  if (a.norm() < 1e-12 || b.norm() < 1e-12) {
    throw ArgumentError("half angle undefined: an outer disc coincides with the centre disc");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  double ang = std::atan2(b.y(), b.x()) - std::atan2(a.y(), a.x());
  ang = std::fmod(ang, two_pi);
  if (ang < 0.0) ang += two_pi;
  double w = 0.5 * ang;
  if (w >= std::numbers::pi) w = 0.0;
  return w;
}

double extract_phi(const Configuration& cfg) {
  const Vec2 d = cfg.position(3) - cfg.position(1);
  return std::atan2(d.y(), d.x());
}

void ChartLift::update(double omega_raw, double phi_raw) {
  const double pi = std::numbers::pi;
  const double k = std::round((omega_ - omega_raw) / pi);
  const double w = omega_raw + k * pi;
  double p = phi_raw + k * pi;
  p += 2.0 * pi * std::round((phi_ - p) / (2.0 * pi));
  omega_ = w;
  phi_ = p;
}

Histogram::Histogram(double lo, double hi, int bins) {
  if (!(hi > lo) || bins < 1) throw ArgumentError("histogram needs lo < hi and bins >= 1");
  edges_.resize(bins + 1);
  for (int k = 0; k <= bins; ++k) edges_[k] = lo + (hi - lo) * k / bins;
  counts_.assign(bins, 0);
}

void Histogram::add(double value) {
  const double lo = edges_.front(), hi = edges_.back();
  if (!(value >= lo && value <= hi)) {
    ++rejected_;
    return;
  }
  int bin = static_cast<int>((value - lo) / (hi - lo) * bins());
  bin = std::clamp(bin, 0, bins() - 1);
  ++counts_[bin];
  ++n_;
}

void Histogram::add(std::span<const double> values) {
  for (double v : values) add(v);
}

void Histogram::merge(const Histogram& other) {
  if (other.edges_ != edges_) throw ArgumentError("cannot merge histograms with different bins");
  for (int k = 0; k < bins(); ++k) counts_[k] += other.counts_[k];
  n_ += other.n_;
  rejected_ += other.rejected_;
}

double Histogram::density(int bin) const {
  if (n_ == 0) return 0.0;
  const double width = edges_[bin + 1] - edges_[bin];
  return static_cast<double>(counts_[bin]) / (static_cast<double>(n_) * width);
}

double ks_distance(std::span<const double> samples, const analytics::DensityModel& model) {
  if (samples.empty()) throw ArgumentError("ks_distance: no samples");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const auto& dom = model.domain();
  if (!dom.contains(x.front()) || !dom.contains(x.back())) {
    throw ArgumentError(fmt::format("ks_distance: samples span [{}, {}] outside [{}, {}]",
                                    x.front(), x.back(), dom.lo, dom.hi));
  }
  const std::vector<double> F = model.cdf_sorted(x);
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max({d, (i + 1) / n - F[i], F[i] - i / n});
  }
  return d;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 0.3) {
    // Dual series, accurate where the alternating one converges slowly.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double s = 0.0;
    for (int k = 1; k <= 50; ++k) {
      const double m = 2 * k - 1;
      s += std::exp(-m * m * pi2 / (8.0 * lambda * lambda));
    }
    return 1.0 - std::sqrt(2.0 * std::numbers::pi) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

TwoSampleKs two_sample_ks(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ArgumentError("two_sample_ks: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(i / n - j / m));
  }
  TwoSampleKs r;
  r.statistic = d;
  const double ne = n * m / (n + m);
  const double sq = std::sqrt(ne);
  // Finite-sample adjustment of the limit law.
  r.p_value = kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d);
  r.critical_1pct = 1.6276236115189502 / sq;
  r.rejected_1pct = r.p_value < 0.01;
  return r;
}

Mat9 velocity_covariance_oracle(const model::ProjectionBundle& bundle, double beta,
                                std::int64_t n, Rng& rng) {
  if (n < 2) throw ArgumentError("covariance oracle needs at least two samples");
  if (!(beta > 0.0)) throw ArgumentError("beta must be positive");
  const double scale = 1.0 / std::sqrt(beta);
  Mat9 acc = Mat9::Zero();
  Vec9 mean = Vec9::Zero();
  Vec9 z;
  for (std::int64_t k = 0; k < n; ++k) {
    for (int i = 0; i < kDim; ++i) z[i] = scale * rng.normal();
    const Vec9 y = bundle.P * z;
    mean += y;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(y);
  }
  const double nn = static_cast<double>(n);
  mean /= nn;
  Mat9 cov = acc.selfadjointView<Eigen::Lower>();
  cov = (cov - nn * mean * mean.transpose()) / (nn - 1.0);
  return cov;
}

double lag1_autocorrelation(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) return 0.0;
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = series[i] - mean;
    den += d * d;
    if (i + 1 < n) num += d * (series[i + 1] - mean);
  }
  return den > 0.0 ? num / den : 0.0;
}

double effective_sample_size(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 3) return static_cast<double>(n);
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
  double c0 = 0.0;
  for (double v : series) c0 += (v - mean) * (v - mean);
  if (c0 <= 0.0) return static_cast<double>(n);
  auto rho = [&](std::size_t lag) {
    double c = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i) c += (series[i] - mean) * (series[i + lag] - mean);
    return c / c0;
  };
  double tau = 1.0;
  for (std::size_t lag = 1; lag + 1 < n; lag += 2) {
    const double pair = rho(lag) + rho(lag + 1);
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  return static_cast<double>(n) / tau;
}

HistogramReport make_report(std::span<const double> samples,
                            const analytics::DensityModel& model, int bins,
                            std::span<const double> tail_thresholds) {
  Histogram h(model.domain().lo, model.domain().hi, bins);
  h.add(samples);
  std::vector<double> inside;
  inside.reserve(samples.size());
  for (double v : samples) {
    if (model.domain().contains(v, 0.0)) inside.push_back(v);
  }
  HistogramReport r;
  r.bin_edges = h.edges();
  r.counts = h.counts();
  r.n_samples = h.n_samples();
  r.ks_statistic = inside.empty() ? 1.0 : ks_distance(inside, model);
  r.reference = model.id();
  for (double t : tail_thresholds) {
    const auto above = std::count_if(inside.begin(), inside.end(), [&](double v) { return v > t; });
    r.tail_estimates[t] = inside.empty() ? 0.0 : static_cast<double>(above) / inside.size();
  }
  return r;
}

}  // namespace rolldisc::stats
