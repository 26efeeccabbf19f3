#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace volregime {

struct KMeansOptions {
  int k = 2;
  int restarts = 20;
  int max_iterations = 300;
  std::uint64_t seed = 1;
};

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centroids;  // k x d
  double inertia = 0.0;
  int best_restart = 0;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by inertia
/// (ties to the lowest restart index). An emptied cluster is re-seeded at the
/// point farthest from its assigned centroid. Rows of `points` are samples.
KMeansResult kmeans(const Eigen::MatrixXd& points, const KMeansOptions& options);

}  // namespace volregime
