#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace volregime {

/// Empirical distribution of one segment: its values sorted ascending.
class EmpiricalDist {
 public:
  /// Throws ContractError if `values` is empty or holds a non-finite value.
  explicit EmpiricalDist(std::vector<double> values,
                         std::optional<std::size_t> source_segment = std::nullopt);

  std::span<const double> sorted_values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  std::optional<std::size_t> source_segment() const noexcept { return source_; }
  /// Step CDF: fraction of values <= x.
  double cdf(double x) const;

 private:
  std::vector<double> values_;
  std::optional<std::size_t> source_;
};

/// Exact W1 = integral of |F_a - F_b| over the merged breakpoints of the two
/// step CDFs. O(|a| + |b|).
double wasserstein1(const EmpiricalDist& a, const EmpiricalDist& b);

/// Symmetric m x m matrix with a zero diagonal, stored row-major.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t size);

  std::size_t size() const noexcept { return size_; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * size_ + j]; }
  /// Sets both (i, j) and (j, i).
  void set(std::size_t i, std::size_t j, double value);
  std::span<const double> entries() const noexcept { return entries_; }

  /// Throws ValidationError unless symmetric, zero-diagonal and non-negative.
  void validate() const;

 private:
  std::size_t size_ = 0;
  std::vector<double> entries_;
};

/// Pairwise W1 between segments, one evaluation per unordered pair.
/// `threads` == 0 uses hardware concurrency; the result never depends on it.
DistanceMatrix distance_matrix(std::span<const EmpiricalDist> segments, unsigned threads = 1);

/// CSV: header row of segment indices, then one row per segment.
void write_csv(std::ostream& out, const DistanceMatrix& d);
DistanceMatrix read_distance_csv(std::istream& in);

/// Positive crossing point of the N(0, sigma1) and N(0, sigma2) densities.
/// Requires 0 < sigma1 < sigma2 (OrderingError otherwise).
double gaussian_crossing(double sigma1, double sigma2);

/// Closed-form W1 between N(0, sigma1) and N(0, sigma2), sigma1 <= sigma2:
/// (sigma2 - sigma1) * sqrt(2 / pi).
double ordered_w1_gaussian(double sigma1, double sigma2);

double normal_pdf(double x, double sigma);
double normal_cdf(double x, double sigma);

}  // namespace volregime
