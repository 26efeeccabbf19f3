#include "volregime_cli/cli.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "output.hpp"
#include "volregime/error.hpp"

#ifndef VOLREGIME_VERSION
#define VOLREGIME_VERSION "0.0.0"
#endif

namespace volregime::cli {

std::string manifest_path_for(const std::string& artifact) {
  return sibling(artifact, ".manifest.json").string();
}

namespace {

void add_common(CLI::App* cmd, Common& c, const std::string& default_out) {
  c.out = default_out;
  cmd->add_option("--seed", c.seed, "Master seed");
  cmd->add_option("--threads", c.threads, "Worker cap; never changes results")->check(CLI::PositiveNumber);
  cmd->add_option("--out", c.out, "Primary output file")->capture_default_str();
  cmd->add_option("--cache-dir", c.cache_dir, "Threshold cache directory (default: $VOLREGIME_CACHE_DIR)");
}

void add_detector(CLI::App* cmd, DetectorFlags& d, bool seed_flag) {
  cmd->add_option("--arl0", d.arl0, "Target in-control average run length")->capture_default_str();
  cmd->add_option("--min-segment", d.min_segment, "Minimum segment length")->capture_default_str();
  cmd->add_option("--t-max", d.t_max, "Last calibrated window size")->capture_default_str();
  cmd->add_option("--calibration-trials", d.calibration_trials, "Monte Carlo streams")->capture_default_str();
  if (seed_flag) cmd->add_option("--calibration-seed", d.calibration_seed, "Calibration seed")->capture_default_str();
}

CLI::Validator kMethods = CLI::IsMember({"eigengap", "zp"});

void write_manifest(const Run& run) {
  json m;
  m["tool"] = "volregime";
  m["version"] = VOLREGIME_VERSION;
  m["command"] = run.command;
  json args = json::array({run.command});
  json params = json::object();
  for (const auto& [flag, value] : run.params) {
    args.push_back(flag);
    args.push_back(value);
    params[flag.substr(2)] = value;
  }
  m["args"] = args;
  m["parameters"] = params;
  m["seed"] = run.seed;
  m["threads"] = run.threads;
  m["cache_key"] = run.cache_key ? json(*run.cache_key) : json(nullptr);
  json inputs = json::array();
  for (const auto& in : run.inputs) inputs.push_back({{"path", in.string()}, {"fnv1a64", file_digest(in)}});
  m["inputs"] = inputs;
  json artifacts = json::array();
  for (const auto& a : run.artifacts) artifacts.push_back(a.string());
  m["artifacts"] = artifacts;
  write_json(manifest_path_for(run.artifacts.front().string()), m);
}

std::vector<std::string> replay_args(const std::string& manifest_file, const std::string& out_dir) {
  std::ifstream in(manifest_file);
  if (!in) throw Error("cannot open manifest " + manifest_file);
  json m;
  try {
    m = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError("invalid manifest " + manifest_file + ": " + e.what(), 0);
  }
  for (const auto& input : m.at("inputs")) {
    const std::string path = input.at("path");
    if (file_digest(path) != input.at("fnv1a64").get<std::string>()) {
      throw ValidationError("input " + path + " changed since the manifest was written");
    }
  }
  std::vector<std::string> args = m.at("args").get<std::vector<std::string>>();
  if (!out_dir.empty()) {
    for (std::size_t i = 0; i + 1 < args.size(); ++i) {
      if (args[i] == "--out") {
        args[i + 1] = (std::filesystem::path(out_dir) / std::filesystem::path(args[i + 1]).filename()).string();
      }
    }
  }
  return args;
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Volatility regime detection, clustering and backtesting", "volregime"};
  app.require_subcommand(1, 1);
  app.set_version_flag("--version", VOLREGIME_VERSION);

  CalibrateOptions calibrate;
  auto* c_cal = app.add_subcommand("calibrate", "Build (or load) the cached detection thresholds");
  add_common(c_cal, calibrate.common, "thresholds.csv");
  calibrate.common.seed = calibrate.detector.calibration_seed;
  add_detector(c_cal, calibrate.detector, false);

  DetectOptions detect;
  auto* c_det = app.add_subcommand("detect", "Detect volatility change points in a price series");
  add_common(c_det, detect.common, "detect.json");
  detect.common.seed = detect.detector.calibration_seed;
  add_detector(c_det, detect.detector, false);
  c_det->add_option("--prices", detect.prices, "date,close CSV")->required();
  c_det->add_option("--ticker", detect.ticker, "Label for the series (default: file stem)");

  DistancesOptions distances;
  auto* c_dist = app.add_subcommand("distances", "Pairwise Wasserstein-1 distances between detected segments");
  add_common(c_dist, distances.common, "distances.csv");
  add_detector(c_dist, distances.detector, true);
  c_dist->add_option("--prices", distances.prices, "date,close CSV")->required();
  c_dist->add_option("--ticker", distances.ticker, "Label for the series (default: file stem)");

  ClusterOptions cluster;
  auto* c_clu = app.add_subcommand("cluster", "Spectral clustering of a distance matrix");
  add_common(c_clu, cluster.common, "cluster.json");
  c_clu->add_option("--distances", cluster.distances, "Distance matrix CSV")->required();
  c_clu->add_option("--method", cluster.method, "eigengap or zp")->check(kMethods)->capture_default_str();
  c_clu->add_option("--k-max", cluster.k_max, "Largest cluster count considered (0: default)");

  RegimesOptions regimes;
  auto* c_reg = app.add_subcommand("regimes", "Full regime report for one price series");
  add_common(c_reg, regimes.common, "report.json");
  add_detector(c_reg, regimes.detector, true);
  c_reg->add_option("--prices", regimes.prices, "date,close CSV")->required();
  c_reg->add_option("--ticker", regimes.ticker, "Label for the series (default: file stem)");
  c_reg->add_option("--method", regimes.method, "eigengap or zp")->check(kMethods)->capture_default_str();
  c_reg->add_option("--kde-points", regimes.kde_points, "Density grid size")->check(CLI::Range(2, 100000));

  SynthOptions synth;
  auto* c_syn = app.add_subcommand("synth", "Synthetic validation study");
  add_common(c_syn, synth.common, "summary.json");
  add_detector(c_syn, synth.detector, true);
  c_syn->add_option("--family", synth.family, "normal or laplace")
      ->check(CLI::IsMember({"normal", "laplace"}))
      ->capture_default_str();
  c_syn->add_option("--trials", synth.trials, "Number of series")->check(CLI::PositiveNumber)->capture_default_str();
  c_syn->add_option("--segments", synth.segments, "Segments per series")->check(CLI::PositiveNumber);
  c_syn->add_option("--min-length", synth.min_length, "Shortest segment")->check(CLI::PositiveNumber);
  c_syn->add_option("--max-length", synth.max_length, "Longest segment")->check(CLI::PositiveNumber);
  c_syn->add_option("--noise-location", synth.noise_location, "SD of the per-segment location shift");
  c_syn->add_option("--noise-scale", synth.noise_scale, "SD of the scale jitter as a fraction of the base");

  BacktestOptions backtest;
  auto* c_bt = app.add_subcommand("backtest", "Walk-forward regime-switching backtest");
  add_common(c_bt, backtest.common, "report.json");
  add_detector(c_bt, backtest.detector, true);
  c_bt->add_option("--risk", backtest.risk, "Risk asset date,close CSV")->required();
  c_bt->add_option("--haven", backtest.haven, "Safe-haven date,close CSV")->required();
  c_bt->add_option("--start", backtest.start, "First trading date (YYYY-MM-DD)")->required();
  c_bt->add_option("--end", backtest.end, "Last trading date (YYYY-MM-DD)")->required();
  c_bt->add_option("--method", backtest.method, "eigengap or zp")->check(kMethods)->capture_default_str();
  c_bt->add_option("--train-years", backtest.train_years, "Training window in years")->capture_default_str();
  c_bt->add_option("--lookback-min", backtest.lookback_min, "Smallest look-back")->capture_default_str();
  c_bt->add_option("--lookback-max", backtest.lookback_max, "Largest look-back")->capture_default_str();
  c_bt->add_option("--cost", backtest.cost, "Fractional cost per switch")->capture_default_str();
  c_bt->add_option("--risk-free", backtest.risk_free, "Annual risk-free rate")->capture_default_str();

  std::string manifest_file;
  std::string replay_dir;
  auto* c_rep = app.add_subcommand("replay", "Re-run a command from its manifest");
  c_rep->add_option("manifest", manifest_file, "Manifest JSON")->required();
  c_rep->add_option("--out-dir", replay_dir, "Write the artifacts here instead of their recorded paths");

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << VOLREGIME_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << "run 'volregime --help' for usage\n";
    return kExitUsage;
  }

  try {
    if (c_rep->parsed()) {
      const auto recorded = replay_args(manifest_file, replay_dir);
      if (!recorded.empty() && recorded.front() == "replay") throw ContractError("manifest records a replay");
      return dispatch(recorded, out, err);
    }
    Run run;
    if (c_cal->parsed()) {
      calibrate.detector.calibration_seed = calibrate.common.seed;
      run_calibrate(calibrate, run, out, err);
    } else if (c_det->parsed()) {
      detect.detector.calibration_seed = detect.common.seed;
      run_detect(detect, run, out, err);
    } else if (c_dist->parsed()) {
      run_distances(distances, run, out, err);
    } else if (c_clu->parsed()) {
      run_cluster(cluster, run, out);
    } else if (c_reg->parsed()) {
      run_regimes(regimes, run, out, err);
    } else if (c_syn->parsed()) {
      run_synth(synth, run, out, err);
    } else if (c_bt->parsed()) {
      run_backtest(backtest, run, out, err);
    }
    write_manifest(run);
    return kExitOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace volregime::cli
