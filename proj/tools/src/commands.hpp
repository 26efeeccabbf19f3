#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace volregime::cli {

/// Everything a manifest records about one invocation.
struct Run {
  std::string command;
  std::vector<std::pair<std::string, std::string>> params;  // flag -> value, canonical order
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> artifacts;  // primary first
  std::optional<std::string> cache_key;
  std::uint64_t seed = 0;
  unsigned threads = 1;

  void param(const std::string& flag, const std::string& value) { params.emplace_back(flag, value); }
};

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
  std::string cache_dir;
};

struct DetectorFlags {
  std::int64_t arl0 = 10000;
  std::int64_t min_segment = 30;
  std::int64_t t_max = 1000;
  std::int64_t calibration_trials = 100000;
  std::uint64_t calibration_seed = 20240101;
};

struct CalibrateOptions {
  Common common;
  DetectorFlags detector;
};

struct DetectOptions {
  Common common;
  DetectorFlags detector;
  std::string prices;
  std::string ticker;
};

struct DistancesOptions {
  Common common;
  DetectorFlags detector;
  std::string prices;
  std::string ticker;
};

struct ClusterOptions {
  Common common;
  std::string distances;
  std::string method = "eigengap";
  int k_max = 0;  // 0: default
};

struct RegimesOptions {
  Common common;
  DetectorFlags detector;
  std::string prices;
  std::string ticker;
  std::string method = "eigengap";
  std::size_t kde_points = 200;
};

struct SynthOptions {
  Common common;
  DetectorFlags detector;
  std::string family = "normal";
  std::size_t trials = 100;
  std::size_t segments = 8;
  std::size_t min_length = 200;
  std::size_t max_length = 300;
  double noise_location = 0.01;
  double noise_scale = 0.05;
};

struct BacktestOptions {
  Common common;
  DetectorFlags detector;
  std::string risk;
  std::string haven;
  std::string start;
  std::string end;
  std::string method = "eigengap";
  int train_years = 4;
  int lookback_min = 20;
  int lookback_max = 30;
  double cost = 0.0;
  double risk_free = 0.0;
};

void run_calibrate(const CalibrateOptions& o, Run& run, std::ostream& out, std::ostream& err);
void run_detect(const DetectOptions& o, Run& run, std::ostream& out, std::ostream& err);
void run_distances(const DistancesOptions& o, Run& run, std::ostream& out, std::ostream& err);
void run_cluster(const ClusterOptions& o, Run& run, std::ostream& out);
void run_regimes(const RegimesOptions& o, Run& run, std::ostream& out, std::ostream& err);
void run_synth(const SynthOptions& o, Run& run, std::ostream& out, std::ostream& err);
void run_backtest(const BacktestOptions& o, Run& run, std::ostream& out, std::ostream& err);

}  // namespace volregime::cli
