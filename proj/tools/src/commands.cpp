#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

#include "output.hpp"
#include "volregime/changepoint.hpp"
#include "volregime/error.hpp"
#include "volregime/market_data.hpp"
#include "volregime/metrics.hpp"
#include "volregime/regimes.hpp"
#include "volregime/spectral.hpp"
#include "volregime/strategy.hpp"
#include "volregime/synthetic.hpp"
#include "volregime/threshold_cache.hpp"
#include "volregime/wasserstein.hpp"

namespace volregime::cli {

namespace {

std::string absolute(const std::string& path) {
  return std::filesystem::absolute(path).lexically_normal().string();
}

void record_common(Run& run, const Common& c) {
  run.seed = c.seed;
  run.threads = c.threads;
  run.param("--seed", std::to_string(c.seed));
  run.param("--threads", std::to_string(c.threads));
  run.param("--out", absolute(c.out));
}

void record_detector(Run& run, const DetectorFlags& d, bool with_seed) {
  run.param("--arl0", std::to_string(d.arl0));
  run.param("--min-segment", std::to_string(d.min_segment));
  run.param("--t-max", std::to_string(d.t_max));
  run.param("--calibration-trials", std::to_string(d.calibration_trials));
  if (with_seed) run.param("--calibration-seed", std::to_string(d.calibration_seed));
}

CalibrationParams calibration_params(const DetectorFlags& d, unsigned threads) {
  CalibrationParams p;
  p.arl0 = d.arl0;
  p.min_segment = d.min_segment;
  p.t_max = d.t_max;
  p.trials = d.calibration_trials;
  p.seed = d.calibration_seed;
  p.threads = threads;
  return p;
}

ThresholdTable thresholds(const Common& c, const DetectorFlags& d, Run& run, std::ostream& err) {
  const CalibrationParams p = calibration_params(d, c.threads);
  const std::filesystem::path dir = c.cache_dir.empty() ? default_cache_dir() : std::filesystem::path(c.cache_dir);
  run.cache_key = cache_key(p);
  if (!std::filesystem::exists(dir / *run.cache_key)) {
    err << "calibrating thresholds into " << (dir / *run.cache_key).string() << " (one-time)\n";
  }
  return load_or_calibrate(p, dir);
}

std::string ticker_for(const std::string& path, const std::string& override_ticker) {
  if (!override_ticker.empty()) return override_ticker;
  return std::filesystem::path(path).stem().string();
}

PriceSeries read_prices(const std::string& path, const std::string& ticker, Run& run) {
  run.inputs.emplace_back(absolute(path));
  return load_prices(path, ticker);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json metrics_json(const PerformanceMetrics& m) {
  json j;
  j["AR"] = m.annualized_return;
  j["SD"] = m.daily_sd;
  j["SR"] = optional_number(m.sharpe);
  j["MD"] = m.max_drawdown;
  j["SoR"] = optional_number(m.sortino);
  j["CR"] = optional_number(m.calmar);
  j["annualized_SD"] = m.annualized_sd;
  return j;
}

json partition_json(const SegmentPartition& p, const std::vector<Date>& dates) {
  json cps = json::array();
  for (std::size_t i = 0; i < p.change_points.size(); ++i) {
    json c;
    c["index"] = p.change_points[i];
    c["date"] = format_date(dates[p.change_points[i]]);
    c["detection_index"] = p.detection_times[i];
    c["detection_date"] = format_date(dates[p.detection_times[i]]);
    cps.push_back(std::move(c));
  }
  return cps;
}

std::vector<EmpiricalDist> segment_dists(std::span<const double> values, const SegmentPartition& p) {
  std::vector<EmpiricalDist> out;
  for (std::size_t j = 0; j < p.segment_count(); ++j) {
    out.emplace_back(std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(p.segment_begin(j)),
                                         values.begin() + static_cast<std::ptrdiff_t>(p.segment_end(j))),
                     j);
  }
  return out;
}

SegmentPartition partition_of(std::span<const double> values, const ThresholdTable& table) {
  if (values.size() < static_cast<std::size_t>(2 * table.min_segment)) {
    SegmentPartition p;
    p.length = values.size();
    p.min_segment = static_cast<std::size_t>(table.min_segment);
    return p;
  }
  return detect_changepoints(values, table);
}

std::string distance_csv(const DistanceMatrix& d) {
  std::ostringstream s;
  write_csv(s, d);
  return s.str();
}

}  // namespace

void run_calibrate(const CalibrateOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "calibrate";
  record_common(run, o.common);
  record_detector(run, o.detector, false);
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  std::vector<double> t, h;
  for (std::size_t i = 0; i < table.thresholds.size(); ++i) {
    t.push_back(static_cast<double>(table.first_index() + i));
    h.push_back(table.thresholds[i]);
  }
  write_text(o.common.out, csv_table({"t", "threshold"}, {t, h}));
  run.artifacts.emplace_back(o.common.out);
  out << "calibrate: " << table.thresholds.size() << " thresholds, key " << *run.cache_key << " -> " << o.common.out
      << "\n";
}

void run_detect(const DetectOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "detect";
  record_common(run, o.common);
  record_detector(run, o.detector, false);
  run.param("--prices", absolute(o.prices));
  run.param("--ticker", ticker_for(o.prices, o.ticker));

  const ReturnSeries returns = log_returns(read_prices(o.prices, ticker_for(o.prices, o.ticker), run));
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  const auto values = returns.values();
  const SegmentPartition p = detect_changepoints(values, table);

  json j;
  j["command"] = "detect";
  j["ticker"] = returns.ticker;
  j["n_returns"] = returns.size();
  j["n_segments"] = p.segment_count();
  j["arl0"] = table.arl0;
  j["min_segment"] = table.min_segment;
  j["cache_key"] = *run.cache_key;
  j["change_points"] = partition_json(p, returns.dates());
  write_json(o.common.out, j);
  run.artifacts.emplace_back(o.common.out);
  out << "detect: " << p.change_points.size() << " change points in " << returns.size() << " returns -> "
      << o.common.out << "\n";
}

void run_distances(const DistancesOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "distances";
  record_common(run, o.common);
  record_detector(run, o.detector, true);
  run.param("--prices", absolute(o.prices));
  run.param("--ticker", ticker_for(o.prices, o.ticker));

  const ReturnSeries returns = log_returns(read_prices(o.prices, ticker_for(o.prices, o.ticker), run));
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  const auto values = returns.values();
  const SegmentPartition p = partition_of(values, table);
  const auto segments = segment_dists(values, p);
  const DistanceMatrix d = distance_matrix(segments, o.common.threads);
  write_text(o.common.out, distance_csv(d));
  run.artifacts.emplace_back(o.common.out);
  out << "distances: " << d.size() << " x " << d.size() << " -> " << o.common.out << "\n";
}

void run_cluster(const ClusterOptions& o, Run& run, std::ostream& out) {
  run.command = "cluster";
  record_common(run, o.common);
  run.param("--distances", absolute(o.distances));
  run.param("--method", o.method);
  run.param("--k-max", std::to_string(o.k_max));
  run.inputs.emplace_back(absolute(o.distances));

  std::ifstream in(o.distances);
  if (!in) throw Error("cannot open " + o.distances);
  const DistanceMatrix d = read_distance_csv(in);
  SpectralOptions options;
  options.method = parse_selector(o.method);
  options.seed = o.common.seed;
  if (o.k_max > 0) options.k_max = o.k_max;
  const ClusterAssignment a = spectral_cluster(d, options);

  json j;
  j["k"] = a.k;
  j["method"] = std::string(to_string(a.method));
  j["labels"] = a.labels;
  j["eigenvalues"] = a.eigenvalues;
  write_json(o.common.out, j);
  run.artifacts.emplace_back(o.common.out);
  out << "cluster: k = " << a.k << " (" << o.method << ") -> " << o.common.out << "\n";
}

void run_regimes(const RegimesOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "regimes";
  record_common(run, o.common);
  record_detector(run, o.detector, true);
  run.param("--prices", absolute(o.prices));
  run.param("--ticker", ticker_for(o.prices, o.ticker));
  run.param("--method", o.method);
  run.param("--kde-points", std::to_string(o.kde_points));

  const ReturnSeries returns = log_returns(read_prices(o.prices, ticker_for(o.prices, o.ticker), run));
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  RegimeConfig config;
  config.method = parse_selector(o.method);
  config.seed = o.common.seed;
  config.threads = o.common.threads;
  const RegimeModel model = fit_regimes(returns, table, config);
  const RegimeReport report = regime_report(model);

  json segments = json::array();
  for (const auto& s : report.segments) {
    json js;
    js["index"] = s.index;
    js["begin"] = s.begin;
    js["end"] = s.end;
    js["start_date"] = s.start_date;
    js["end_date"] = s.end_date;
    js["label"] = s.label;
    js["variance"] = s.variance;
    segments.push_back(std::move(js));
  }
  json j;
  j["command"] = "regimes";
  j["ticker"] = report.ticker;
  j["n_returns"] = returns.size();
  j["n_segments"] = report.n_segments;
  j["n_clusters"] = report.n_clusters;
  j["method"] = o.method;
  j["seed"] = o.common.seed;
  j["cache_key"] = *run.cache_key;
  j["cluster_sizes"] = report.cluster_sizes;
  j["cluster_variances"] = report.cluster_variances;
  j["variance_rank"] = report.variance_rank;
  j["eigenvalues"] = model.assignment.eigenvalues;
  j["change_points"] = partition_json(model.partition, model.dates);
  j["segments"] = segments;

  const std::filesystem::path primary = o.common.out;
  const auto partition_file = sibling(primary, "_partition.csv");
  const auto distance_file = sibling(primary, "_distances.csv");
  const auto kde_file = sibling(primary, "_kde.csv");

  std::string partition_csv = "segment,begin,end,start_date,end_date,label,variance\n";
  for (const auto& s : report.segments) {
    partition_csv += std::to_string(s.index) + "," + std::to_string(s.begin) + "," + std::to_string(s.end) + "," +
                     s.start_date + "," + s.end_date + "," + std::to_string(s.label) + "," +
                     format_double(s.variance) + "\n";
  }

  const auto values = returns.values();
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  std::string kde_csv = "segment,label,x,density\n";
  for (std::size_t s = 0; s < model.segments.size(); ++s) {
    const DensityCurve curve = kde(model.segments[s].sorted_values(), *lo_it, *hi_it, o.kde_points);
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
      kde_csv += std::to_string(s) + "," + std::to_string(model.assignment.labels[s]) + "," +
                 format_double(curve.grid[g]) + "," + format_double(curve.density[g]) + "\n";
    }
  }

  write_json(primary, j);
  write_text(partition_file, partition_csv);
  write_text(distance_file, distance_csv(model.distances));
  write_text(kde_file, kde_csv);
  run.artifacts = {primary, partition_file, distance_file, kde_file};
  out << "regimes: " << report.n_segments << " segments, " << report.n_clusters << " clusters -> " << o.common.out
      << "\n";
}

void run_synth(const SynthOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "synth";
  record_common(run, o.common);
  record_detector(run, o.detector, true);
  run.param("--family", o.family);
  run.param("--trials", std::to_string(o.trials));
  run.param("--segments", std::to_string(o.segments));
  run.param("--min-length", std::to_string(o.min_length));
  run.param("--max-length", std::to_string(o.max_length));
  run.param("--noise-location", format_double(o.noise_location));
  run.param("--noise-scale", format_double(o.noise_scale));

  SyntheticSpec spec;
  spec.family = parse_family(o.family);
  spec.segments_per_series = o.segments;
  spec.min_length = o.min_length;
  spec.max_length = o.max_length;
  spec.noise_sd_location = o.noise_location;
  spec.noise_scale_fraction = o.noise_scale;
  spec.seed = o.common.seed;
  spec.validate();
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  ExperimentOptions options;
  options.threads = o.common.threads;
  const ExperimentSummary summary = run_experiment(spec, o.trials, table, options);

  json trials = json::array();
  std::vector<double> eig, zp;
  for (const auto& t : summary.trials) {
    json jt;
    jt["trial"] = t.trial;
    jt["seed"] = t.seed;
    jt["true_segments"] = t.true_segments;
    jt["detected_segments"] = t.detected_segments;
    jt["true_clusters"] = t.true_clusters;
    jt["matched"] = t.matched;
    jt["fmi_eigengap"] = optional_number(t.fmi_eigengap);
    jt["fmi_zp"] = optional_number(t.fmi_zp);
    jt["k_eigengap"] = t.k_eigengap ? json(*t.k_eigengap) : json(nullptr);
    jt["k_zp"] = t.k_zp ? json(*t.k_zp) : json(nullptr);
    trials.push_back(std::move(jt));
    if (t.matched) {
      eig.push_back(*t.fmi_eigengap);
      zp.push_back(*t.fmi_zp);
    }
  }
  json j;
  j["command"] = "synth";
  j["family"] = o.family;
  j["seed"] = o.common.seed;
  j["n_trials"] = summary.n_trials;
  j["segments_per_series"] = spec.segments_per_series;
  j["base_scales"] = spec.base_scales;
  j["length_range"] = {spec.min_length, spec.max_length};
  j["noise_sd_location"] = spec.noise_sd_location;
  j["noise_scale_fraction"] = spec.noise_scale_fraction;
  j["cache_key"] = *run.cache_key;
  j["mismatch_count"] = summary.mismatch_count;
  j["mismatch_rate"] = static_cast<double>(summary.mismatch_count) / static_cast<double>(summary.n_trials);
  j["mean_fmi_eigengap"] = optional_number(summary.mean_fmi_eigengap);
  j["mean_fmi_zp"] = optional_number(summary.mean_fmi_zp);
  j["trials"] = trials;

  constexpr std::size_t kBins = 20;
  std::vector<double> lo(kBins), hi(kBins), eig_count(kBins, 0.0), zp_count(kBins, 0.0);
  for (std::size_t b = 0; b < kBins; ++b) {
    lo[b] = static_cast<double>(b) / kBins;
    hi[b] = static_cast<double>(b + 1) / kBins;
  }
  auto bin_of = [&](double v) { return std::min<std::size_t>(static_cast<std::size_t>(v * kBins), kBins - 1); };
  for (double v : eig) eig_count[bin_of(v)] += 1.0;
  for (double v : zp) zp_count[bin_of(v)] += 1.0;

  const std::filesystem::path primary = o.common.out;
  const auto hist_file = sibling(primary, "_fmi.csv");
  const auto kde_file = sibling(primary, "_fmi_kde.csv");
  write_json(primary, j);
  write_text(hist_file, csv_table({"bin_lo", "bin_hi", "eigengap", "zp"}, {lo, hi, eig_count, zp_count}));
  run.artifacts = {primary, hist_file};
  if (!eig.empty()) {
    const DensityCurve ce = kde(eig, 0.0, 1.0, 101);
    const DensityCurve cz = kde(zp, 0.0, 1.0, 101);
    write_text(kde_file, csv_table({"fmi", "eigengap", "zp"}, {ce.grid, ce.density, cz.density}));
    run.artifacts.push_back(kde_file);
  }
  out << "synth: " << summary.n_trials << " trials, " << summary.mismatch_count << " mismatches";
  if (summary.mean_fmi_eigengap) {
    out << ", mean FMI eigengap " << *summary.mean_fmi_eigengap << " zp " << *summary.mean_fmi_zp;
  }
  out << " -> " << o.common.out << "\n";
}

void run_backtest(const BacktestOptions& o, Run& run, std::ostream& out, std::ostream& err) {
  run.command = "backtest";
  record_common(run, o.common);
  record_detector(run, o.detector, true);
  run.param("--risk", absolute(o.risk));
  run.param("--haven", absolute(o.haven));
  run.param("--start", o.start);
  run.param("--end", o.end);
  run.param("--method", o.method);
  run.param("--train-years", std::to_string(o.train_years));
  run.param("--lookback-min", std::to_string(o.lookback_min));
  run.param("--lookback-max", std::to_string(o.lookback_max));
  run.param("--cost", format_double(o.cost));
  run.param("--risk-free", format_double(o.risk_free));

  StrategyConfig config;
  config.risk_ticker = ticker_for(o.risk, "");
  config.haven_ticker = ticker_for(o.haven, "");
  config.train_window_years = o.train_years;
  config.lookback_min = o.lookback_min;
  config.lookback_max = o.lookback_max;
  config.cost_per_switch = o.cost;
  config.risk_free_rate = o.risk_free;
  config.regime.method = parse_selector(o.method);
  config.regime.seed = o.common.seed;
  config.regime.threads = o.common.threads;
  config.validate();
  const Date start = parse_date(o.start);
  const Date end = parse_date(o.end);
  const PriceSeries risk = read_prices(o.risk, config.risk_ticker, run);
  const PriceSeries haven = read_prices(o.haven, config.haven_ticker, run);
  const ThresholdTable table = thresholds(o.common, o.detector, run, err);
  const BacktestReport report = volregime::run_backtest(risk, haven, start, end, config, table);

  json windows = json::array();
  for (const auto& w : report.windows) {
    json jw;
    jw["train_start"] = format_date(w.train_start);
    jw["trade_start"] = format_date(w.trade_start);
    jw["trade_end"] = format_date(w.trade_end);
    jw["train_days"] = w.train_days;
    jw["trade_days"] = w.trade_days;
    jw["n_segments"] = w.n_segments;
    jw["n_clusters"] = w.n_clusters;
    jw["cluster_sizes"] = w.cluster_sizes;
    jw["avoided_clusters"] = w.avoided_clusters;
    jw["lookback"] = w.lookback;
    json scores = json::array();
    for (const auto& s : w.lookback_scores) scores.push_back({{"lookback", s.lookback}, {"sharpe", optional_number(s.sharpe)}});
    jw["lookback_scores"] = scores;
    windows.push_back(std::move(jw));
  }
  std::size_t haven_days = 0;
  for (const auto& p : report.positions) haven_days += p.holding == Holding::haven ? 1 : 0;

  json j;
  j["command"] = "backtest";
  j["risk"] = config.risk_ticker;
  j["haven"] = config.haven_ticker;
  j["start"] = o.start;
  j["end"] = o.end;
  j["seed"] = o.common.seed;
  j["method"] = o.method;
  j["cache_key"] = *run.cache_key;
  j["n_days"] = report.dates.size();
  j["haven_days"] = haven_days;
  j["strategies"] = {{"dynamic", metrics_json(report.dynamic.metrics)},
                     {"hold_" + config.risk_ticker, metrics_json(report.hold_risk.metrics)},
                     {"hold_" + config.haven_ticker, metrics_json(report.hold_haven.metrics)},
                     {"baseline", metrics_json(report.baseline.metrics)}};
  j["windows"] = windows;

  const std::filesystem::path primary = o.common.out;
  const auto equity_file = sibling(primary, "_equity.csv");
  const auto positions_file = sibling(primary, "_positions.csv");

  std::string equity = "date,dynamic,hold_" + config.risk_ticker + ",hold_" + config.haven_ticker + ",baseline\n";
  std::string positions = "date,holding,window,matched_segment,matched_cluster,distance\n";
  for (std::size_t i = 0; i < report.dates.size(); ++i) {
    equity += format_date(report.dates[i]) + "," + format_double(report.dynamic.equity[i]) + "," +
              format_double(report.hold_risk.equity[i]) + "," + format_double(report.hold_haven.equity[i]) + "," +
              format_double(report.baseline.equity[i]) + "\n";
    const DailyPosition& p = report.positions[i];
    positions += format_date(p.date) + "," +
                 (p.holding == Holding::risk ? config.risk_ticker : config.haven_ticker) + "," +
                 std::to_string(p.window) + "," + std::to_string(p.matched_segment) + "," +
                 std::to_string(p.matched_cluster) + "," + format_double(p.distance) + "\n";
  }
  write_json(primary, j);
  write_text(equity_file, equity);
  write_text(positions_file, positions);
  run.artifacts = {primary, equity_file, positions_file};
  out << "backtest: " << report.dates.size() << " days, dynamic SR ";
  if (report.dynamic.metrics.sharpe) out << *report.dynamic.metrics.sharpe;
  else out << "n/a";
  out << " -> " << o.common.out << "\n";
}

}  // namespace volregime::cli
