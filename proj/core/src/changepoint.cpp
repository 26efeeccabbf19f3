#include "volregime/changepoint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "volregime/error.hpp"
#include "volregime/seeding.hpp"

namespace volregime {

namespace {

constexpr std::uint64_t kCalibrationSalt = 0x63616c6962ULL;  // "calib"
constexpr std::size_t kMinSurvivors = 100;

unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Linear-interpolation (type 7) quantile; reorders `values`.
double upper_quantile(std::vector<float>& values, double q) {
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double v_lo = values[lo];
  if (frac == 0.0 || lo + 1 >= values.size()) return v_lo;
  const double v_hi = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(lo) + 1, values.end());
  return v_lo + frac * (v_hi - v_lo);
}

}  // namespace

std::vector<std::size_t> ranks(std::span<const double> pooled) {
  std::vector<double> sorted(pooled.begin(), pooled.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> out;
  out.reserve(pooled.size());
  for (double r : pooled) {
    out.push_back(static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), r) - sorted.begin()));
  }
  return out;
}

MoodResult mood_statistic(std::span<const double> left, std::span<const double> right) {
  const std::size_t m = left.size();
  const std::size_t n = right.size();
  const std::size_t pooled_size = m + n;
  if (m == 0 || n == 0) throw DegenerateSampleError("Mood statistic needs two nonempty samples");
  if (pooled_size < 4) throw DegenerateSampleError("Mood statistic needs a pooled size of at least 4");

  std::vector<double> pooled(left.begin(), left.end());
  pooled.insert(pooled.end(), right.begin(), right.end());
  const auto [lo, hi] = std::minmax_element(pooled.begin(), pooled.end());
  if (*lo == *hi) return {0.0, m};

  const auto r = ranks(pooled);
  // 4 M' = sum (2 rank - (N + 1))^2, exact in integers.
  const auto c = static_cast<std::int64_t>(pooled_size) + 1;
  std::int64_t four_m = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::int64_t d = 2 * static_cast<std::int64_t>(r[i]) - c;
    four_m += d * d;
  }
  const double big_n = static_cast<double>(pooled_size);
  const double mean = mood_null_mean(static_cast<double>(m), big_n);
  const double var = mood_null_variance(static_cast<double>(m), big_n);
  return {std::abs(static_cast<double>(four_m) / 4.0 - mean) / std::sqrt(var), m};
}

void MoodScanner::reset() {
  values_.clear();
  ranks_.clear();
  min_ = std::numeric_limits<double>::infinity();
  max_ = -std::numeric_limits<double>::infinity();
}

void MoodScanner::push(double x) {
  std::int64_t new_rank = 1;
  const std::size_t n = values_.size();
  const double* v = values_.data();
  std::int64_t* r = ranks_.data();
  for (std::size_t i = 0; i < n; ++i) {
    r[i] += static_cast<std::int64_t>(v[i] >= x);
    new_rank += static_cast<std::int64_t>(v[i] <= x);
  }
  values_.push_back(x);
  ranks_.push_back(new_rank);
  min_ = std::min(min_, x);
  max_ = std::max(max_, x);
}

MoodResult MoodScanner::max_statistic(std::size_t min_segment) const {
  return max_statistic(min_segment, values_.size());
}

MoodResult MoodScanner::max_statistic(std::size_t min_segment, std::size_t max_split) const {
  const std::size_t big_n = values_.size();
  const std::size_t lo = std::max<std::size_t>(min_segment, 1);
  if (big_n < 4 || big_n < 2 * lo) return {0.0, 0};
  if (min_ == max_) return {0.0, 0};

  const double nn = static_cast<double>(big_n);
  const std::int64_t c = static_cast<std::int64_t>(big_n) + 1;
  const double four_mean_per_m = (nn * nn - 1.0) / 3.0;
  const std::size_t hi = std::min(big_n - lo, max_split);

  // Maximize (4M' - 4mu)^2 / (m n); the remaining factor is constant in m.
  std::int64_t four_m = 0;
  double best = -1.0;
  std::size_t best_m = 0;
  const std::int64_t* r = ranks_.data();
  for (std::size_t i = 0; i < hi; ++i) {
    const std::int64_t d = 2 * r[i] - c;
    four_m += d * d;
    const std::size_t m = i + 1;
    if (m < lo) continue;
    const double md = static_cast<double>(m);
    const double diff = static_cast<double>(four_m) - md * four_mean_per_m;
    const double score = diff * diff / (md * (nn - md));
    if (score > best) {
      best = score;
      best_m = m;
    }
  }
  const double k = (nn + 1.0) * (nn * nn - 4.0) / 180.0;
  return {std::sqrt(best / k) / 4.0, best_m};
}

double ThresholdTable::threshold(std::size_t t) const {
  const std::size_t first = first_index();
  if (t < first || thresholds.empty()) return std::numeric_limits<double>::infinity();
  const std::size_t i = t - first;
  return i < thresholds.size() ? thresholds[i] : thresholds.back();
}

namespace {

void check_params(const CalibrationParams& p) {
  if (p.arl0 < 2) throw ContractError("arl0 must be at least 2");
  if (p.min_segment < 1) throw ContractError("min_segment must be positive");
  if (p.trials < 1000) throw ContractError("calibration needs at least 1000 trials");
  if (p.t_max < 2 * p.min_segment) throw ContractError("t_max must be at least 2 * min_segment");
}

}  // namespace

std::vector<float> simulate_null_scans(const CalibrationParams& params) {
  check_params(params);
  const auto first = static_cast<std::size_t>(2 * params.min_segment);
  const auto t_max = static_cast<std::size_t>(params.t_max);
  const std::size_t width = t_max - first + 1;
  const auto trials = static_cast<std::size_t>(params.trials);
  std::vector<float> out(trials * width);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    MoodScanner scanner;
    for (std::size_t trial = next++; trial < trials; trial = next++) {
      Rng rng = make_rng(params.seed, trial, kCalibrationSalt);
      std::normal_distribution<double> normal(0.0, 1.0);
      scanner.reset();
      float* row = out.data() + trial * width;
      for (std::size_t t = 1; t <= t_max; ++t) {
        scanner.push(normal(rng));
        if (t >= first) {
          row[t - first] = static_cast<float>(
              scanner.max_statistic(static_cast<std::size_t>(params.min_segment)).statistic);
        }
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(resolve_threads(params.threads),
                                                static_cast<unsigned>(trials));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return out;
}

ThresholdTable calibrate_thresholds(const CalibrationParams& params) {
  check_params(params);
  const auto scans = simulate_null_scans(params);
  const auto first = static_cast<std::size_t>(2 * params.min_segment);
  const std::size_t width = static_cast<std::size_t>(params.t_max) - first + 1;
  const auto trials = static_cast<std::size_t>(params.trials);
  const double alpha = 1.0 / static_cast<double>(params.arl0);

  ThresholdTable table;
  table.arl0 = params.arl0;
  table.min_segment = params.min_segment;
  table.t_max = params.t_max;
  table.trials = params.trials;
  table.calibration_seed = params.seed;
  table.thresholds.reserve(width);

  std::vector<std::size_t> alive(trials);
  for (std::size_t i = 0; i < trials; ++i) alive[i] = i;
  std::vector<float> values;
  for (std::size_t k = 0; k < width; ++k) {
    if (alive.size() < kMinSurvivors) {
      throw CalibrationExhaustedError(
          "only " + std::to_string(alive.size()) + " of " + std::to_string(trials) +
          " calibration streams survive to t = " + std::to_string(first + k) +
          "; increase trials or reduce t_max");
    }
    values.clear();
    for (std::size_t i : alive) values.push_back(scans[i * width + k]);
    double h = upper_quantile(values, 1.0 - alpha);
    if (!(h > 0.0)) h = std::numeric_limits<double>::min();
    table.thresholds.push_back(h);
    std::erase_if(alive, [&](std::size_t i) { return static_cast<double>(scans[i * width + k]) > h; });
  }
  return table;
}

ChangePointDetector::ChangePointDetector(const ThresholdTable& table) : table_(&table) {
  if (table.min_segment < 1 || table.thresholds.empty()) {
    throw ContractError("detector needs a calibrated threshold table");
  }
}

void ChangePointDetector::feed_window(double x) {
  scanner_.push(x);
  if (alarm_) return;
  const std::size_t big_n = scanner_.size();
  if (big_n < table_->first_index()) return;
  const MoodResult r = scanner_.max_statistic(static_cast<std::size_t>(table_->min_segment));
  if (r.split_index != 0 && r.statistic > table_->threshold(big_n)) alarm_ = Alarm{big_n};
}

std::optional<Detection> ChangePointDetector::resolve() {
  const std::size_t big_n = alarm_->window_size;
  alarm_.reset();
  const MoodResult r = scanner_.max_statistic(static_cast<std::size_t>(table_->min_segment), big_n - 1);
  if (r.split_index == 0) return std::nullopt;
  return Detection{window_start_ + r.split_index, window_start_ + big_n - 1};
}

void ChangePointDetector::restart(std::size_t at) {
  window_start_ = at;
  scanner_.reset();
}

void ChangePointDetector::settle(std::vector<Detection>& out, bool final) {
  const auto delay = static_cast<std::size_t>(table_->min_segment);
  auto full = [&] { return alarm_ && scanner_.size() >= alarm_->window_size + delay; };
  auto ready = [&] { return full() || (final && alarm_); };
  while (ready()) {
    const std::optional<Detection> det = resolve();
    if (!det) continue;
    out.push_back(*det);
    detections_.push_back(*det);
    restart(det->change_point);
    for (std::size_t i = window_start_; i < seen_ && !full(); ++i) feed_window(history_[i]);
  }
}

std::vector<Detection> ChangePointDetector::push(double x) {
  history_.push_back(x);
  ++seen_;
  feed_window(x);
  std::vector<Detection> out;
  settle(out, false);
  return out;
}

std::vector<Detection> ChangePointDetector::finish() {
  std::vector<Detection> out;
  settle(out, true);
  return out;
}

std::size_t SegmentPartition::segment_begin(std::size_t j) const {
  if (j >= segment_count()) throw ContractError("segment index out of range");
  return j == 0 ? 0 : change_points[j - 1];
}

std::size_t SegmentPartition::segment_end(std::size_t j) const {
  if (j >= segment_count()) throw ContractError("segment index out of range");
  return j + 1 == segment_count() ? length : change_points[j];
}

SegmentPartition detect_changepoints(std::span<const double> returns, const ThresholdTable& table) {
  const auto min_segment = static_cast<std::size_t>(table.min_segment);
  if (returns.size() < 2 * min_segment) {
    throw InsufficientDataError("change point detection needs at least " +
                                std::to_string(2 * min_segment) + " returns, got " +
                                std::to_string(returns.size()));
  }
  ChangePointDetector detector(table);
  for (double x : returns) detector.push(x);
  detector.finish();

  SegmentPartition partition;
  partition.length = returns.size();
  partition.min_segment = min_segment;
  for (const auto& d : detector.detections()) {
    partition.change_points.push_back(d.change_point);
    partition.detection_times.push_back(d.detection_time);
  }
  return partition;
}

}  // namespace volregime
