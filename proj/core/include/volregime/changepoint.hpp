#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace volregime {

/// Counting ranks: rank(r) = #{s in pooled : r >= s}. Tied values share the
/// count of elements not exceeding them.
std::vector<std::size_t> ranks(std::span<const double> pooled);

struct MoodResult {
  double statistic = 0.0;       // |M' - mu| / sqrt(var), >= 0
  std::size_t split_index = 0;  // size of the left sample
};

/// Standardized two-sample Mood dispersion statistic. Throws
/// DegenerateSampleError when either sample is empty or the pooled size is
/// below 4. A pooled sample whose values are all equal yields 0.
MoodResult mood_statistic(std::span<const double> left, std::span<const double> right);

/// Null mean and variance of M' for a left sample of size m out of N.
constexpr double mood_null_mean(double m, double pooled) {
  return m * (pooled * pooled - 1.0) / 12.0;
}
constexpr double mood_null_variance(double m, double pooled) {
  const double n = pooled - m;
  return m * n * (pooled + 1.0) * (pooled * pooled - 4.0) / 180.0;
}

/// Incremental state for the max-over-splits Mood scan of a growing window.
/// Each push is O(N): existing ranks are bumped in place and the split scan
/// is a single prefix-sum pass.
class MoodScanner {
 public:
  void reset();
  void push(double x);
  std::size_t size() const noexcept { return values_.size(); }

  /// max over m in [min_segment, N - min_segment] of the standardized
  /// statistic; ties resolve to the smallest m. Returns statistic 0 with
  /// split 0 if no split is admissible or every value in the window ties.
  MoodResult max_statistic(std::size_t min_segment) const;
  /// Same scan with the split additionally capped at `max_split`.
  MoodResult max_statistic(std::size_t min_segment, std::size_t max_split) const;

 private:
  std::vector<double> values_;
  std::vector<std::int64_t> ranks_;
  double min_ = std::numeric_limits<double>::infinity();
  double max_ = -std::numeric_limits<double>::infinity();
};

/// Time-indexed detection thresholds h_t for the streaming Mood scan.
struct ThresholdTable {
  std::int64_t arl0 = 10000;
  std::int64_t min_segment = 30;
  std::int64_t t_max = 0;
  std::int64_t trials = 0;
  std::uint64_t calibration_seed = 0;
  /// thresholds[i] is h_t for t = first_index() + i, up to t_max.
  std::vector<double> thresholds;

  std::size_t first_index() const noexcept { return static_cast<std::size_t>(2 * min_segment); }
  /// +inf below first_index(); beyond t_max the last calibrated value holds.
  double threshold(std::size_t t) const;
};

struct CalibrationParams {
  std::int64_t arl0 = 10000;
  std::int64_t min_segment = 30;
  std::int64_t t_max = 1000;
  std::int64_t trials = 100000;
  std::uint64_t seed = 20240101;
  unsigned threads = 0;  // 0: hardware concurrency. Never affects the result.
};

/// Monte Carlo thresholds under i.i.d. N(0,1) streams: h_t is the empirical
/// (1 - 1/arl0) quantile of the scan statistic among streams that have not
/// yet exceeded an earlier threshold. Deterministic in the parameters.
/// Throws ContractError on bad parameters and CalibrationExhaustedError when
/// fewer than 100 streams survive to some t.
ThresholdTable calibrate_thresholds(const CalibrationParams& params);

/// Per-trial scan trajectories used by calibration; exposed for diagnostics.
/// Row-major [trial][t - first_index()].
std::vector<float> simulate_null_scans(const CalibrationParams& params);

/// A change point with the absolute index at which it was declared.
struct Detection {
  std::size_t change_point = 0;    // first index of the new segment
  std::size_t detection_time = 0;  // index of the observation that triggered it
};

/// Streaming change detector. Feed observations one at a time. When the scan
/// exceeds h_N the alarm time is fixed at N; the change point is then located
/// once up to min_segment further observations have arrived (or at finish()),
/// as the argmax split not later than N - 1. The detector restarts there and
/// re-feeds the buffered tail. Not thread-safe; instances are independent.
class ChangePointDetector {
 public:
  explicit ChangePointDetector(const ThresholdTable& table);

  /// Feeds the next observation. Returns every detection it resolved.
  std::vector<Detection> push(double x);
  /// Resolves a pending alarm with the observations seen so far.
  std::vector<Detection> finish();

  std::size_t observations_seen() const noexcept { return seen_; }
  std::size_t window_start() const noexcept { return window_start_; }
  const std::vector<Detection>& detections() const noexcept { return detections_; }

 private:
  struct Alarm {
    std::size_t window_size = 0;  // N at the alarm
  };
  void feed_window(double x);
  std::optional<Detection> resolve();
  void settle(std::vector<Detection>& out, bool final);
  void restart(std::size_t at);

  const ThresholdTable* table_;
  MoodScanner scanner_;
  std::vector<double> history_;
  std::size_t window_start_ = 0;
  std::size_t seen_ = 0;
  std::optional<Alarm> alarm_;
  std::vector<Detection> detections_;
};

/// Ordered change points τ_1..τ_{m-1}. Segment j spans the half-open index
/// range [τ_{j-1}, τ_j) with τ_0 = 0 and τ_m = length.
struct SegmentPartition {
  std::vector<std::size_t> change_points;
  std::vector<std::size_t> detection_times;
  std::size_t length = 0;
  std::size_t min_segment = 0;

  std::size_t segment_count() const noexcept { return change_points.size() + 1; }
  std::size_t segment_begin(std::size_t j) const;
  std::size_t segment_end(std::size_t j) const;
};

/// Runs the streaming detector over a whole series. Requires
/// returns.size() >= 2 * min_segment (InsufficientDataError otherwise).
SegmentPartition detect_changepoints(std::span<const double> returns, const ThresholdTable& table);

}  // namespace volregime
