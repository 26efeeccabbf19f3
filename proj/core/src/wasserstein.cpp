#include "volregime/wasserstein.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "volregime/error.hpp"

namespace volregime {

EmpiricalDist::EmpiricalDist(std::vector<double> values, std::optional<std::size_t> source_segment)
    : values_(std::move(values)), source_(source_segment) {
  if (values_.empty()) throw ContractError("empirical distribution needs at least one value");
  for (double v : values_) {
    if (!std::isfinite(v)) throw ContractError("empirical distribution values must be finite");
  }
  std::sort(values_.begin(), values_.end());
}

double EmpiricalDist::cdf(double x) const {
  const auto it = std::upper_bound(values_.begin(), values_.end(), x);
  return static_cast<double>(it - values_.begin()) / static_cast<double>(values_.size());
}

double wasserstein1(const EmpiricalDist& a, const EmpiricalDist& b) {
  const auto va = a.sorted_values();
  const auto vb = b.sorted_values();
  const auto na = static_cast<std::int64_t>(va.size());
  const auto nb = static_cast<std::int64_t>(vb.size());

  // Between breakpoints F_a - F_b = (i nb - j na) / (na nb) exactly.
  std::int64_t i = 0, j = 0;
  double prev = std::min(va.front(), vb.front());
  double acc = 0.0;
  while (i < na || j < nb) {
    const double x = (j >= nb || (i < na && va[i] <= vb[j])) ? va[i] : vb[j];
    const auto gap = std::abs(i * nb - j * na);
    acc += static_cast<double>(gap) * (x - prev);
    while (i < na && va[i] == x) ++i;
    while (j < nb && vb[j] == x) ++j;
    prev = x;
  }
  return acc / (static_cast<double>(na) * static_cast<double>(nb));
}

DistanceMatrix::DistanceMatrix(std::size_t size) : size_(size), entries_(size * size, 0.0) {}

void DistanceMatrix::set(std::size_t i, std::size_t j, double value) {
  entries_[i * size_ + j] = value;
  entries_[j * size_ + i] = value;
}

void DistanceMatrix::validate() const {
  for (std::size_t i = 0; i < size_; ++i) {
    if ((*this)(i, i) != 0.0) throw ValidationError("distance matrix diagonal must be zero");
    for (std::size_t j = 0; j < size_; ++j) {
      const double v = (*this)(i, j);
      if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError("distances must be finite and non-negative");
      if (v != (*this)(j, i)) throw ValidationError("distance matrix must be symmetric");
    }
  }
}

DistanceMatrix distance_matrix(std::span<const EmpiricalDist> segments, unsigned threads) {
  const std::size_t m = segments.size();
  DistanceMatrix d(m);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(m * (m - (m > 0 ? 1 : 0)) / 2);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
  }
  std::vector<double> values(pairs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t p = next++; p < pairs.size(); p = next++) {
      values[p] = wasserstein1(segments[pairs[p].first], segments[pairs[p].second]);
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(pairs.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (std::size_t p = 0; p < pairs.size(); ++p) d.set(pairs[p].first, pairs[p].second, values[p]);
  return d;
}

void write_csv(std::ostream& out, const DistanceMatrix& d) {
  const std::size_t m = d.size();
  for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << j;
  out << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) out << (j ? "," : "") << d(i, j);
    out << '\n';
  }
}

DistanceMatrix read_distance_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty distance matrix file", 0);
  const std::size_t m = line.empty() ? 0 : static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  DistanceMatrix d(m);
  std::vector<double> row;
  for (std::size_t i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw ParseError("distance matrix has fewer rows than columns", i + 2);
    std::stringstream ss(line);
    std::string cell;
    row.clear();
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        throw ParseError("invalid distance '" + cell + "'", i + 2);
      }
    }
    if (row.size() != m) throw ParseError("expected " + std::to_string(m) + " columns", i + 2);
    for (std::size_t j = i; j < m; ++j) d.set(i, j, row[j]);
    for (std::size_t j = 0; j < i; ++j) {
      if (row[j] != d(i, j)) throw ValidationError("distance matrix is not symmetric");
    }
  }
  d.validate();
  return d;
}

double gaussian_crossing(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma1 < sigma2)) {
    throw OrderingError("gaussian_crossing requires 0 < sigma1 < sigma2");
  }
  // (s2^2 - s1^2) and log(s2/s1) are formed without cancellation for s2 ~ s1.
  const double diff = sigma2 - sigma1;
  const double tau2 = 2.0 * sigma1 * sigma1 * sigma2 * sigma2 / (diff * (sigma1 + sigma2)) *
                      std::log1p(diff / sigma1);
  return std::sqrt(tau2);
}

double ordered_w1_gaussian(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || sigma2 < sigma1) throw OrderingError("ordered_w1_gaussian requires 0 < sigma1 <= sigma2");
  return (sigma2 - sigma1) * std::sqrt(2.0 / std::numbers::pi);
}

double normal_pdf(double x, double sigma) {
  const double z = x / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

double normal_cdf(double x, double sigma) { return 0.5 * std::erfc(-x / (sigma * std::numbers::sqrt2)); }

}  // namespace volregime
