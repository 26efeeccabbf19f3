#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "volregime/changepoint.hpp"
#include "volregime/market_data.hpp"
#include "volregime/spectral.hpp"
#include "volregime/wasserstein.hpp"

namespace volregime {

struct RegimeConfig {
  KSelector method = KSelector::eigengap;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  SpectralOptions spectral;  // method/seed above take precedence
};

/// Segments of a return series grouped into volatility regimes.
struct RegimeModel {
  std::string ticker;
  std::vector<Date> dates;  // one per return, may be empty for raw series
  SegmentPartition partition;
  std::vector<EmpiricalDist> segments;
  DistanceMatrix distances;
  ClusterAssignment assignment;
  /// Sample variance of the concatenated returns of each cluster's segments.
  std::vector<double> cluster_variances;
  /// Cluster indices, most volatile first.
  std::vector<int> variance_rank;

  std::size_t segment_count() const noexcept { return segments.size(); }
  int cluster_count() const noexcept { return assignment.k; }
};

/// Detect -> segment distributions -> W1 matrix -> spectral clusters.
/// A series shorter than 2 * min_segment is treated as a single segment.
RegimeModel fit_regimes(const ReturnSeries& returns, const ThresholdTable& table,
                        const RegimeConfig& config = {});
RegimeModel fit_regimes(std::span<const double> returns, const ThresholdTable& table,
                        const RegimeConfig& config = {});

struct SegmentReport {
  std::size_t index = 0;
  std::size_t begin = 0;  // half-open return index range
  std::size_t end = 0;
  std::string start_date;  // empty when the model carries no dates
  std::string end_date;
  int label = 0;
  double variance = 0.0;
};

struct RegimeReport {
  std::string ticker;
  std::size_t n_segments = 0;
  int n_clusters = 0;
  /// Cluster sizes listed in order of each cluster's first segment.
  std::vector<std::size_t> cluster_sizes;
  std::vector<SegmentReport> segments;
  std::vector<double> cluster_variances;
  std::vector<int> variance_rank;
  std::vector<std::size_t> change_points;
  std::vector<std::size_t> detection_times;
};

RegimeReport regime_report(const RegimeModel& model);

/// Gaussian KDE on a uniform grid with Silverman's rule-of-thumb bandwidth.
struct DensityCurve {
  double bandwidth = 0.0;
  std::vector<double> grid;
  std::vector<double> density;
};

double silverman_bandwidth(std::span<const double> values);
DensityCurve kde(std::span<const double> values, double lo, double hi, std::size_t points);

}  // namespace volregime
