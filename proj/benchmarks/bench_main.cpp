#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "volregime/changepoint.hpp"
#include "volregime/seeding.hpp"
#include "volregime/spectral.hpp"
#include "volregime/wasserstein.hpp"

using namespace volregime;

namespace {

std::vector<double> normals(std::size_t n, double sd, std::uint64_t seed) {
  Rng rng(derive_seed(seed, n));
  std::normal_distribution<double> z(0.0, sd);
  std::vector<double> v(n);
  for (double& x : v) x = z(rng);
  return v;
}

void BM_MoodScan(benchmark::State& state) {
  const auto x = normals(static_cast<std::size_t>(state.range(0)), 1.0, 1);
  for (auto _ : state) {
    MoodScanner scanner;
    for (double v : x) scanner.push(v);
    benchmark::DoNotOptimize(scanner.max_statistic(30));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MoodScan)->RangeMultiplier(2)->Range(128, 2048)->Complexity();

void BM_Wasserstein1(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const EmpiricalDist a(normals(n, 1.0, 2));
  const EmpiricalDist b(normals(n, 2.0, 3));
  for (auto _ : state) benchmark::DoNotOptimize(wasserstein1(a, b));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Wasserstein1)->RangeMultiplier(4)->Range(256, 1 << 18)->Complexity();

DistanceMatrix ordered_distances(int m) {
  std::vector<EmpiricalDist> segs;
  for (int i = 0; i < m; ++i) segs.emplace_back(normals(500, 0.5 + 0.25 * (i % 5), static_cast<std::uint64_t>(i)));
  return distance_matrix(segs);
}

void BM_SpectralEigengap(benchmark::State& state) {
  const DistanceMatrix d = ordered_distances(static_cast<int>(state.range(0)));
  SpectralOptions opt;
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cluster(d, opt));
}
BENCHMARK(BM_SpectralEigengap)->Arg(10)->Arg(30)->Arg(60);

void BM_SpectralZp(benchmark::State& state) {
  const DistanceMatrix d = ordered_distances(static_cast<int>(state.range(0)));
  SpectralOptions opt;
  opt.method = KSelector::zp;
  for (auto _ : state) benchmark::DoNotOptimize(spectral_cluster(d, opt));
}
BENCHMARK(BM_SpectralZp)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
