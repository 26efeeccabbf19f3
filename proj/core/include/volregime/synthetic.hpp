#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "volregime/changepoint.hpp"
#include "volregime/spectral.hpp"

namespace volregime {

enum class Family { normal, laplace };

std::string_view to_string(Family family);
Family parse_family(std::string_view text);

/// Piecewise-stationary test series. Each segment picks one of the base
/// scales (never the same as its predecessor), a uniform length in
/// [min_length, max_length], a location shift ~ N(0, noise_sd_location^2)
/// and a scale jitter ~ N(0, (noise_scale_fraction * base)^2).
struct SyntheticSpec {
  Family family = Family::normal;
  std::vector<double> base_scales{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t segments_per_series = 8;
  std::size_t min_length = 200;
  std::size_t max_length = 300;
  double noise_sd_location = 0.01;
  double noise_scale_fraction = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticSeries {
  std::vector<double> values;
  std::vector<std::size_t> change_points;  // true segment starts, excluding 0
  std::vector<int> base_labels;            // base-scale index per segment
  std::vector<double> scales;              // realized scale per segment
  std::vector<double> locations;
};

/// Deterministic in (spec, trial_seed).
SyntheticSeries generate_series(const SyntheticSpec& spec, std::uint64_t trial_seed);

struct PairCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

PairCounts pair_counts(const std::vector<int>& truth, const std::vector<int>& predicted);

/// Fowlkes-Mallows index over unordered pairs; 0 when TP + FP or TP + FN is 0.
/// Throws ContractError on length mismatch or fewer than two elements.
double fmi(const std::vector<int>& truth, const std::vector<int>& predicted);

struct TrialOutcome {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::size_t true_segments = 0;
  std::size_t detected_segments = 0;
  int true_clusters = 0;
  bool matched = false;
  std::optional<double> fmi_eigengap;  // present iff matched
  std::optional<double> fmi_zp;
  std::optional<int> k_eigengap;
  std::optional<int> k_zp;
};

struct ExperimentSummary {
  SyntheticSpec spec;
  std::size_t n_trials = 0;
  std::size_t mismatch_count = 0;
  std::optional<double> mean_fmi_eigengap;  // absent if every trial mismatched
  std::optional<double> mean_fmi_zp;
  std::vector<TrialOutcome> trials;
};

struct ExperimentOptions {
  SpectralOptions spectral;  // method and seed are set per trial
  unsigned threads = 1;
};

/// Runs n_trials independent trials; trial i uses derive_seed(spec.seed, i).
ExperimentSummary run_experiment(const SyntheticSpec& spec, std::size_t n_trials,
                                 const ThresholdTable& table,
                                 const ExperimentOptions& options = {});

TrialOutcome run_trial(const SyntheticSpec& spec, std::size_t trial, const ThresholdTable& table,
                       const ExperimentOptions& options = {});

}  // namespace volregime
