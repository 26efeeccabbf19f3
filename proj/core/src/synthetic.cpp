#include "volregime/synthetic.hpp"

#include <atomic>
#include <cmath>
#include <random>
#include <set>
#include <thread>

#include "volregime/error.hpp"
#include "volregime/seeding.hpp"
#include "volregime/wasserstein.hpp"

namespace volregime {

std::string_view to_string(Family family) { return family == Family::normal ? "normal" : "laplace"; }

Family parse_family(std::string_view text) {
  if (text == "normal") return Family::normal;
  if (text == "laplace") return Family::laplace;
  throw ContractError("unknown family '" + std::string(text) + "' (expected normal or laplace)");
}

void SyntheticSpec::validate() const {
  if (base_scales.size() < 2) throw ContractError("synthetic spec needs at least two base scales");
  for (double s : base_scales) {
    if (!(s > 0.0)) throw ContractError("base scales must be positive");
  }
  if (segments_per_series < 1) throw ContractError("segments_per_series must be positive");
  if (min_length < 1 || max_length < min_length) throw ContractError("invalid segment length range");
  if (noise_sd_location < 0.0 || noise_scale_fraction < 0.0) throw ContractError("noise magnitudes must be non-negative");
}

namespace {

__extension__ typedef unsigned __int128 u128;

std::uint64_t uniform_int(Rng& rng, std::uint64_t lo, std::uint64_t hi) {
  // Inclusive range; multiply-shift keeps the draw platform independent.
  const std::uint64_t span = hi - lo + 1;
  return lo + static_cast<std::uint64_t>((static_cast<u128>(rng()) * span) >> 64);
}

double uniform_open01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

double laplace_draw(Rng& rng, double location, double scale) {
  const double u = uniform_open01(rng) - 0.5;
  const double magnitude = -scale * std::log1p(-2.0 * std::abs(u));
  return location + (u < 0.0 ? -magnitude : magnitude);
}

}  // namespace

SyntheticSeries generate_series(const SyntheticSpec& spec, std::uint64_t trial_seed) {
  spec.validate();
  Rng rng(trial_seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  SyntheticSeries out;
  const std::size_t n_bases = spec.base_scales.size();
  int previous = -1;
  for (std::size_t s = 0; s < spec.segments_per_series; ++s) {
    int base = 0;
    if (previous < 0) {
      base = static_cast<int>(uniform_int(rng, 0, n_bases - 1));
    } else {
      // Uniform over the other bases so adjacent segments always differ.
      base = static_cast<int>(uniform_int(rng, 0, n_bases - 2));
      if (base >= previous) ++base;
    }
    previous = base;
    const auto length = static_cast<std::size_t>(uniform_int(rng, spec.min_length, spec.max_length));
    const double base_scale = spec.base_scales[static_cast<std::size_t>(base)];
    const double location = spec.noise_sd_location * standard(rng);
    double scale = base_scale + spec.noise_scale_fraction * base_scale * standard(rng);
    if (!(scale > 0.0)) scale = 0.01 * base_scale;

    if (s > 0) out.change_points.push_back(out.values.size());
    out.base_labels.push_back(base);
    out.scales.push_back(scale);
    out.locations.push_back(location);
    for (std::size_t i = 0; i < length; ++i) {
      out.values.push_back(spec.family == Family::normal ? location + scale * standard(rng)
                                                         : laplace_draw(rng, location, scale));
    }
  }
  return out;
}

PairCounts pair_counts(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw ContractError("FMI needs label vectors of equal length");
  PairCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (std::size_t j = i + 1; j < truth.size(); ++j) {
      const bool same_truth = truth[i] == truth[j];
      const bool same_pred = predicted[i] == predicted[j];
      if (same_truth && same_pred) ++c.tp;
      else if (same_pred) ++c.fp;
      else if (same_truth) ++c.fn;
    }
  }
  return c;
}

double fmi(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.size() != predicted.size()) throw ContractError("FMI needs label vectors of equal length");
  if (truth.size() < 2) throw ContractError("FMI needs at least two elements");
  const PairCounts c = pair_counts(truth, predicted);
  const std::size_t same_pred = c.tp + c.fp;
  const std::size_t same_truth = c.tp + c.fn;
  // Both all-singleton partitions agree perfectly.
  if (same_pred == 0 && same_truth == 0) return 1.0;
  if (same_pred == 0 || same_truth == 0) return 0.0;
  return static_cast<double>(c.tp) / std::sqrt(static_cast<double>(same_pred) * static_cast<double>(same_truth));
}

TrialOutcome run_trial(const SyntheticSpec& spec, std::size_t trial, const ThresholdTable& table,
                       const ExperimentOptions& options) {
  TrialOutcome outcome;
  outcome.trial = trial;
  outcome.seed = derive_seed(spec.seed, trial);
  const SyntheticSeries series = generate_series(spec, outcome.seed);
  outcome.true_segments = series.base_labels.size();
  outcome.true_clusters = static_cast<int>(std::set<int>(series.base_labels.begin(), series.base_labels.end()).size());

  const SegmentPartition partition = detect_changepoints(series.values, table);
  outcome.detected_segments = partition.segment_count();
  outcome.matched = outcome.detected_segments == outcome.true_segments;
  if (!outcome.matched) return outcome;

  std::vector<EmpiricalDist> segments;
  for (std::size_t j = 0; j < partition.segment_count(); ++j) {
    segments.emplace_back(std::vector<double>(series.values.begin() + static_cast<std::ptrdiff_t>(partition.segment_begin(j)),
                                              series.values.begin() + static_cast<std::ptrdiff_t>(partition.segment_end(j))),
                          j);
  }
  const DistanceMatrix d = distance_matrix(segments);

  SpectralOptions spectral = options.spectral;
  spectral.seed = outcome.seed;
  spectral.method = KSelector::eigengap;
  const ClusterAssignment eig = spectral_cluster(d, spectral);
  spectral.method = KSelector::zp;
  const ClusterAssignment zp = spectral_cluster(d, spectral);
  if (series.base_labels.size() >= 2) {
    outcome.fmi_eigengap = fmi(series.base_labels, eig.labels);
    outcome.fmi_zp = fmi(series.base_labels, zp.labels);
  } else {
    // A single segment is trivially clustered correctly.
    outcome.fmi_eigengap = 1.0;
    outcome.fmi_zp = 1.0;
  }
  outcome.k_eigengap = eig.k;
  outcome.k_zp = zp.k;
  return outcome;
}

ExperimentSummary run_experiment(const SyntheticSpec& spec, std::size_t n_trials, const ThresholdTable& table,
                                 const ExperimentOptions& options) {
  if (n_trials < 1) throw ContractError("run_experiment needs at least one trial");
  spec.validate();
  ExperimentSummary summary;
  summary.spec = spec;
  summary.n_trials = n_trials;
  summary.trials.resize(n_trials);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < n_trials; t = next++) summary.trials[t] = run_trial(spec, t, table, options);
  };
  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trials));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  double sum_eig = 0.0, sum_zp = 0.0;
  std::size_t matched = 0;
  for (const auto& t : summary.trials) {
    if (!t.matched) {
      ++summary.mismatch_count;
      continue;
    }
    ++matched;
    sum_eig += *t.fmi_eigengap;
    sum_zp += *t.fmi_zp;
  }
  if (matched > 0) {
    summary.mean_fmi_eigengap = sum_eig / static_cast<double>(matched);
    summary.mean_fmi_zp = sum_zp / static_cast<double>(matched);
  }
  return summary;
}

}  // namespace volregime
