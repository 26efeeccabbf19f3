#include "volregime/regimes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "volregime/error.hpp"

namespace volregime {

namespace {

double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

double quantile_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

RegimeModel fit_regimes(std::span<const double> returns, const ThresholdTable& table, const RegimeConfig& config) {
  if (returns.size() < 2) throw InsufficientDataError("regime fitting needs at least two returns");
  RegimeModel model;
  const auto min_segment = static_cast<std::size_t>(table.min_segment);
  if (returns.size() < 2 * min_segment) {
    model.partition.length = returns.size();
    model.partition.min_segment = min_segment;
  } else {
    model.partition = detect_changepoints(returns, table);
  }

  const std::size_t m = model.partition.segment_count();
  model.segments.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto begin = returns.begin() + static_cast<std::ptrdiff_t>(model.partition.segment_begin(j));
    const auto end = returns.begin() + static_cast<std::ptrdiff_t>(model.partition.segment_end(j));
    model.segments.emplace_back(std::vector<double>(begin, end), j);
  }
  model.distances = distance_matrix(model.segments, config.threads);

  SpectralOptions spectral = config.spectral;
  spectral.method = config.method;
  spectral.seed = config.seed;
  model.assignment = spectral_cluster(model.distances, spectral);

  const int k = model.assignment.k;
  std::vector<std::vector<double>> pooled(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < m; ++j) {
    auto& bucket = pooled[static_cast<std::size_t>(model.assignment.labels[j])];
    const auto values = model.segments[j].sorted_values();
    bucket.insert(bucket.end(), values.begin(), values.end());
  }
  model.cluster_variances.reserve(static_cast<std::size_t>(k));
  for (const auto& bucket : pooled) model.cluster_variances.push_back(sample_variance(bucket));
  model.variance_rank.resize(static_cast<std::size_t>(k));
  std::iota(model.variance_rank.begin(), model.variance_rank.end(), 0);
  std::stable_sort(model.variance_rank.begin(), model.variance_rank.end(), [&](int a, int b) {
    return model.cluster_variances[static_cast<std::size_t>(a)] > model.cluster_variances[static_cast<std::size_t>(b)];
  });
  return model;
}

RegimeModel fit_regimes(const ReturnSeries& returns, const ThresholdTable& table, const RegimeConfig& config) {
  const auto values = returns.values();
  RegimeModel model = fit_regimes(std::span<const double>(values), table, config);
  model.ticker = returns.ticker;
  model.dates = returns.dates();
  return model;
}

RegimeReport regime_report(const RegimeModel& model) {
  RegimeReport report;
  report.ticker = model.ticker;
  report.n_segments = model.segment_count();
  report.n_clusters = model.cluster_count();
  report.cluster_variances = model.cluster_variances;
  report.variance_rank = model.variance_rank;
  report.change_points = model.partition.change_points;
  report.detection_times = model.partition.detection_times;

  std::vector<int> order;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(model.cluster_count()), 0);
  for (std::size_t j = 0; j < report.n_segments; ++j) {
    const int label = model.assignment.labels[j];
    if (std::find(order.begin(), order.end(), label) == order.end()) order.push_back(label);
    ++sizes[static_cast<std::size_t>(label)];

    SegmentReport seg;
    seg.index = j;
    seg.begin = model.partition.segment_begin(j);
    seg.end = model.partition.segment_end(j);
    if (!model.dates.empty()) {
      seg.start_date = format_date(model.dates[seg.begin]);
      seg.end_date = format_date(model.dates[seg.end - 1]);
    }
    seg.label = label;
    seg.variance = sample_variance(model.segments[j].sorted_values());
    report.segments.push_back(std::move(seg));
  }
  for (int label : order) report.cluster_sizes.push_back(sizes[static_cast<std::size_t>(label)]);
  return report;
}

double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) return 1.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double sd = std::sqrt(sample_variance(sorted));
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

DensityCurve kde(std::span<const double> values, double lo, double hi, std::size_t points) {
  if (values.empty()) throw ContractError("kde needs at least one value");
  if (points < 2 || !(hi > lo)) throw ContractError("kde grid needs hi > lo and at least two points");
  DensityCurve curve;
  curve.bandwidth = silverman_bandwidth(values);
  const double h = curve.bandwidth;
  const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  curve.grid.resize(points);
  curve.density.resize(points);
  for (std::size_t g = 0; g < points; ++g) {
    const double x = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(points - 1);
    double acc = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      acc += std::exp(-0.5 * z * z);
    }
    curve.grid[g] = x;
    curve.density[g] = acc * norm;
  }
  return curve;
}

}  // namespace volregime
