#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "volregime/wasserstein.hpp"

namespace volregime {

/// Locally scaled affinity A_ij = exp(-D_ij^2 / (sigma_i sigma_j)).
struct AffinityMatrix {
  Eigen::MatrixXd entries;
  std::vector<double> local_scales;

  Eigen::Index size() const noexcept { return entries.rows(); }
};

/// sigma_i = D_{i,K}, the K-th smallest entry of row i counting the zero
/// diagonal (so the (K-1)-th nearest other segment), K = ceil(sqrt(m)).
/// A zero sigma_i falls back to the smallest positive distance in the row,
/// or 1 if the row is all zeros.
AffinityMatrix affinity(const DistanceMatrix& d);

/// Spectrum of L_sym = I - Deg^{-1/2} A Deg^{-1/2}, eigenvalues ascending.
/// Each eigenvector is signed so its largest-magnitude entry is positive.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns
  Eigen::VectorXd degrees;
};

SpectralDecomposition laplacians(const AffinityMatrix& a);

/// Default upper bound on the cluster count: min(m - 1, 10), at least 1.
int default_k_max(std::size_t m);

/// argmax over c in [1, k_max] of lambda_{c+1} - lambda_c (1-based,
/// ascending); ties go to the smallest c. m = 1 gives 1. For m = 2 the
/// locally scaled spectrum is the same for every pair of distinct segments,
/// so two segments are reported as two clusters.
int select_k_eigengap(const SpectralDecomposition& dec, int k_max);

struct ZpOptions {
  int max_iterations = 200;
  double step = 1.0;
  /// Stop once the cost improves by less than this over two sweeps.
  double tolerance = 1e-3;
  /// Candidates whose cost is within this of the best count as ties.
  double tie_tolerance = 1e-3;
};

struct ZpSelection {
  int k = 1;
  std::vector<int> candidates;
  std::vector<double> costs;  // normalized alignment cost per candidate
  bool converged = true;      // false if any candidate hit max_iterations
};

/// Rotation-alignment cost of an m x c embedding: (J / m - 1) / c with
/// J = sum_i sum_j Z_ij^2 / max_j Z_ij^2. Zero iff every row has one
/// non-zero entry.
double zp_alignment_cost(const Eigen::MatrixXd& z);

/// Minimizes zp_alignment_cost over Givens rotations of x by incremental
/// coordinate gradient descent from two starts (all angles 0 and all pi/4),
/// keeping the lower cost. Returns the rotated matrix.
Eigen::MatrixXd zp_rotate(const Eigen::MatrixXd& x, const ZpOptions& options, double* cost_out,
                          bool* converged_out);

/// Self-tuning cluster count: for c in [2, min(k_max, m)] align the top-c
/// eigenvectors of the normalized affinity; the smallest cost wins, ties
/// toward the larger c.
ZpSelection select_k_zp(const AffinityMatrix& a, int k_max, const ZpOptions& options = {});

enum class KSelector { eigengap, zp };

std::string_view to_string(KSelector method);
KSelector parse_selector(std::string_view text);

struct ClusterAssignment {
  int k = 1;
  std::vector<int> labels;  // relabelled by order of first appearance
  KSelector method = KSelector::eigengap;
  std::vector<double> eigenvalues;
};

struct SpectralOptions {
  KSelector method = KSelector::eigengap;
  std::uint64_t seed = 1;
  std::optional<int> k_max;
  /// Bypasses both selectors.
  std::optional<int> forced_k;
  int kmeans_restarts = 20;
  int kmeans_max_iterations = 300;
  ZpOptions zp;
};

/// Affinity -> Laplacian -> k selection -> k-means on the rows of the k
/// smallest L_sym eigenvectors.
ClusterAssignment spectral_cluster(const DistanceMatrix& d, const SpectralOptions& options);

/// Maps labels to 0, 1, ... in order of first appearance.
std::vector<int> canonical_labels(const std::vector<int>& labels);

}  // namespace volregime
