#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "volregime/seeding.hpp"
#include "volregime/error.hpp"
#include "volregime/synthetic.hpp"

using namespace volregime;

namespace {

// Fowlkes-Mallows from the contingency table: TP = sum C(n_ij, 2).
double contingency_fmi(const std::vector<int>& a, const std::vector<int>& b) {
  const int ka = *std::max_element(a.begin(), a.end()) + 1;
  const int kb = *std::max_element(b.begin(), b.end()) + 1;
  std::vector<std::vector<double>> table(static_cast<std::size_t>(ka), std::vector<double>(static_cast<std::size_t>(kb)));
  std::vector<double> rows(static_cast<std::size_t>(ka)), cols(static_cast<std::size_t>(kb));
  for (std::size_t i = 0; i < a.size(); ++i) {
    table[static_cast<std::size_t>(a[i])][static_cast<std::size_t>(b[i])] += 1;
    rows[static_cast<std::size_t>(a[i])] += 1;
    cols[static_cast<std::size_t>(b[i])] += 1;
  }
  auto pairs = [](double n) { return n * (n - 1) / 2; };
  double tp = 0, same_a = 0, same_b = 0;
  for (const auto& r : table) {
    for (double n : r) tp += pairs(n);
  }
  for (double n : rows) same_a += pairs(n);
  for (double n : cols) same_b += pairs(n);
  if (same_a == 0 || same_b == 0) return tp == 0 && same_a == same_b ? 1.0 : 0.0;
  return tp / std::sqrt(same_a * same_b);
}

}  // namespace

TEST_CASE("fmi examples") {
  CHECK(fmi({0, 1, 1, 2}, {0, 1, 1, 2}) == 1.0);
  CHECK(fmi({0, 0, 1}, {5, 5, 5}) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
  CHECK(fmi({0, 0, 1, 1}, {0, 1, 0, 1}) == 0.0);
  CHECK_THROWS_AS(fmi({0, 1}, {0, 1, 2}), ContractError);
  const PairCounts c = pair_counts({0, 0, 1}, {5, 5, 5});
  CHECK(c.tp == 1);
  CHECK(c.fp == 2);
  CHECK(c.fn == 0);
}

TEST_CASE("fmi agrees with the contingency oracle and is symmetric") {
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 12);
    std::uniform_int_distribution<int> la(0, 1 + trial % 4);
    std::uniform_int_distribution<int> lb(0, 1 + (trial / 4) % 4);
    std::vector<int> a(n), b(n);
    for (auto& x : a) x = la(rng);
    for (auto& x : b) x = lb(rng);
    a = canonical_labels(a);
    b = canonical_labels(b);
    CHECK(fmi(a, b) == doctest::Approx(contingency_fmi(a, b)).epsilon(1e-14));
    CHECK(fmi(a, b) == fmi(b, a));
    CHECK(fmi(a, a) == 1.0);
  }
}

TEST_CASE("generated series follow the spec") {
  SyntheticSpec spec;
  for (std::uint64_t s = 0; s < 30; ++s) {
    const SyntheticSeries x = generate_series(spec, s);
    CHECK(x.values.size() >= 1600);
    CHECK(x.values.size() <= 2400);
    REQUIRE(x.base_labels.size() == 8);
    REQUIRE(x.change_points.size() == 7);
    std::size_t prev = 0;
    for (std::size_t cp : x.change_points) {
      CHECK(cp - prev >= 200);
      CHECK(cp - prev <= 300);
      prev = cp;
    }
    for (std::size_t j = 1; j < x.base_labels.size(); ++j) CHECK(x.base_labels[j] != x.base_labels[j - 1]);
  }
  const auto a = generate_series(spec, 99);
  const auto b = generate_series(spec, 99);
  CHECK(a.values == b.values);
  CHECK(a.change_points == b.change_points);
}

TEST_CASE("two segment construction") {
  SyntheticSpec spec;
  spec.base_scales = {1.0, 4.0};
  spec.segments_per_series = 2;
  const auto x = generate_series(spec, 3);
  REQUIRE(x.change_points.size() == 1);
  CHECK(x.base_labels[0] != x.base_labels[1]);
  CHECK(x.change_points[0] >= 200);
  CHECK(x.change_points[0] <= 300);
}

TEST_CASE("laplace segments have the requested spread") {
  SyntheticSpec spec;
  spec.family = Family::laplace;
  spec.base_scales = {1.0, 3.0};
  spec.segments_per_series = 2;
  spec.min_length = 20000;
  spec.max_length = 20000;
  spec.noise_sd_location = 0;
  spec.noise_scale_fraction = 0;
  const auto x = generate_series(spec, 5);
  for (std::size_t j = 0; j < 2; ++j) {
    const std::size_t lo = j == 0 ? 0 : x.change_points[0];
    const std::size_t hi = j == 0 ? x.change_points[0] : x.values.size();
    double mean_abs = 0;
    for (std::size_t i = lo; i < hi; ++i) mean_abs += std::abs(x.values[i]);
    mean_abs /= static_cast<double>(hi - lo);
    CHECK(mean_abs == doctest::Approx(x.scales[j]).epsilon(0.03));
  }
}

TEST_CASE("easy single trial is matched with perfect score") {
  SyntheticSpec spec;
  spec.base_scales = {0.25, 4.0};
  spec.segments_per_series = 2;
  const ExperimentSummary s = run_experiment(spec, 1, testing::default_table());
  REQUIRE(s.trials.size() == 1);
  CHECK(s.mismatch_count == 0);
  CHECK(s.trials[0].matched);
  CHECK(*s.mean_fmi_eigengap == 1.0);
  CHECK(*s.mean_fmi_zp == 1.0);
}

TEST_CASE("experiments are deterministic across thread counts") {
  SyntheticSpec spec;
  spec.seed = 4;
  ExperimentOptions one;
  ExperimentOptions three;
  three.threads = 3;
  const auto a = run_experiment(spec, 6, testing::default_table(), one);
  const auto b = run_experiment(spec, 6, testing::default_table(), three);
  CHECK(a.mismatch_count == b.mismatch_count);
  CHECK(a.mean_fmi_eigengap == b.mean_fmi_eigengap);
  CHECK(a.mean_fmi_zp == b.mean_fmi_zp);
  for (std::size_t i = 0; i < a.trials.size(); ++i) CHECK(a.trials[i].detected_segments == b.trials[i].detected_segments);
}
