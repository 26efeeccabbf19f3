#include "volregime/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "volregime/error.hpp"
#include "volregime/kmeans.hpp"

namespace volregime {

AffinityMatrix affinity(const DistanceMatrix& d) {
  const std::size_t m = d.size();
  if (m == 0) throw ContractError("affinity needs at least one segment");
  AffinityMatrix a;
  a.local_scales.assign(m, 1.0);
  if (m > 1) {
    // sigma_i = D_{i,K}: K-th entry of row i in ascending order, the zero diagonal included.
    const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
    std::vector<double> row;
    for (std::size_t i = 0; i < m; ++i) {
      row.clear();
      for (std::size_t j = 0; j < m; ++j) {
        if (j != i) row.push_back(d(i, j));
      }
      std::sort(row.begin(), row.end());
      double sigma = row[k - 2];
      if (!(sigma > 0.0)) {
        const auto pos = std::upper_bound(row.begin(), row.end(), 0.0);
        sigma = pos == row.end() ? 1.0 : *pos;
      }
      a.local_scales[i] = sigma;
    }
  }
  a.entries.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    a.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1.0;
    for (std::size_t j = i + 1; j < m; ++j) {
      const double dij = d(i, j);
      const double v = std::exp(-dij * dij / (a.local_scales[i] * a.local_scales[j]));
      a.entries(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      a.entries(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  return a;
}

namespace {

void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    const double peak = vectors.col(c).cwiseAbs().maxCoeff();
    for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
      // First entry within rounding of the peak magnitude decides the sign.
      if (std::abs(vectors(r, c)) >= peak * (1.0 - 1e-9)) {
        if (vectors(r, c) < 0.0) vectors.col(c) *= -1.0;
        break;
      }
    }
  }
}

}  // namespace

SpectralDecomposition laplacians(const AffinityMatrix& a) {
  const Eigen::Index m = a.size();
  if (m == 0) throw ContractError("laplacians need a nonempty affinity matrix");
  SpectralDecomposition dec;
  dec.degrees = a.entries.rowwise().sum();
  const Eigen::VectorXd inv_sqrt = dec.degrees.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd l_sym = Eigen::MatrixXd::Identity(m, m) - inv_sqrt.asDiagonal() * a.entries * inv_sqrt.asDiagonal();
  l_sym = 0.5 * (l_sym + l_sym.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l_sym);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition of the normalized Laplacian failed");
  dec.eigenvalues = solver.eigenvalues();
  dec.eigenvectors = solver.eigenvectors();
  fix_signs(dec.eigenvectors);
  return dec;
}

int default_k_max(std::size_t m) {
  if (m <= 1) return 1;
  return static_cast<int>(std::min<std::size_t>(m - 1, 10));
}

int select_k_eigengap(const SpectralDecomposition& dec, int k_max) {
  const auto m = static_cast<int>(dec.eigenvalues.size());
  if (m <= 1) return 1;
  if (m == 2) return 2;
  k_max = std::clamp(k_max, 1, m - 1);
  int best = 1;
  double best_gap = -std::numeric_limits<double>::infinity();
  for (int c = 1; c <= k_max; ++c) {
    const double gap = dec.eigenvalues[c] - dec.eigenvalues[c - 1];
    if (gap > best_gap) {
      best_gap = gap;
      best = c;
    }
  }
  return best;
}

double zp_alignment_cost(const Eigen::MatrixXd& z) {
  const Eigen::Index m = z.rows();
  const Eigen::Index c = z.cols();
  if (m == 0 || c == 0) return 0.0;
  double j_total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double peak = z.row(i).cwiseAbs2().maxCoeff();
    j_total += peak > 0.0 ? z.row(i).squaredNorm() / peak : 1.0;
  }
  return (j_total / static_cast<double>(m) - 1.0) / static_cast<double>(c);
}

namespace {

struct Givens {
  Eigen::Index i;
  Eigen::Index j;
};

std::vector<Givens> givens_pairs(Eigen::Index c) {
  std::vector<Givens> pairs;
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index j = i + 1; j < c; ++j) pairs.push_back({i, j});
  }
  return pairs;
}

void apply_rotation(Eigen::MatrixXd& y, const Givens& g, double theta) {
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const Eigen::VectorXd ci = y.col(g.i);
  const Eigen::VectorXd cj = y.col(g.j);
  y.col(g.i) = cs * ci + sn * cj;
  y.col(g.j) = -sn * ci + cs * cj;
}

void apply_rotation_derivative(Eigen::MatrixXd& y, const Givens& g, double theta) {
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const Eigen::VectorXd ci = y.col(g.i);
  const Eigen::VectorXd cj = y.col(g.j);
  y.setZero();
  y.col(g.i) = -sn * ci + cs * cj;
  y.col(g.j) = -cs * ci - sn * cj;
}

Eigen::MatrixXd rotate(const Eigen::MatrixXd& x, const std::vector<Givens>& pairs, const std::vector<double>& theta) {
  Eigen::MatrixXd z = x;
  for (std::size_t k = 0; k < pairs.size(); ++k) apply_rotation(z, pairs[k], theta[k]);
  return z;
}

double cost_gradient(const Eigen::MatrixXd& x, const std::vector<Givens>& pairs, const std::vector<double>& theta,
                     std::size_t k) {
  Eigen::MatrixXd a = x;
  for (std::size_t q = 0; q < k; ++q) apply_rotation(a, pairs[q], theta[q]);
  apply_rotation_derivative(a, pairs[k], theta[k]);
  for (std::size_t q = k + 1; q < pairs.size(); ++q) apply_rotation(a, pairs[q], theta[q]);
  const Eigen::MatrixXd z = rotate(x, pairs, theta);

  const Eigen::Index m = z.rows();
  const Eigen::Index c = z.cols();
  double grad = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    Eigen::Index jm = 0;
    const double peak = z.row(i).cwiseAbs2().maxCoeff(&jm);
    if (!(peak > 0.0)) continue;
    const double dpeak = 2.0 * z(i, jm) * a(i, jm);
    for (Eigen::Index j = 0; j < c; ++j) {
      grad += 2.0 * z(i, j) * a(i, j) / peak - z(i, j) * z(i, j) * dpeak / (peak * peak);
    }
  }
  return grad / (static_cast<double>(m) * static_cast<double>(c));
}

}  // namespace

namespace {

std::vector<double> descend(const Eigen::MatrixXd& x, const std::vector<Givens>& pairs,
                            std::vector<double> theta, const ZpOptions& options, double& cost, bool& converged) {
  cost = zp_alignment_cost(rotate(x, pairs, theta));
  double cost_old1 = cost;
  double cost_old2 = cost;
  converged = false;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      const double g = cost_gradient(x, pairs, theta, k);
      const double previous = theta[k];
      theta[k] = previous - options.step * g;
      const double trial = zp_alignment_cost(rotate(x, pairs, theta));
      if (trial < cost) {
        cost = trial;
      } else {
        theta[k] = previous;
      }
    }
    if (iter > 2 && cost_old2 - cost < options.tolerance) {
      converged = true;
      break;
    }
    cost_old2 = cost_old1;
    cost_old1 = cost;
  }
  return theta;
}

}  // namespace

Eigen::MatrixXd zp_rotate(const Eigen::MatrixXd& x, const ZpOptions& options, double* cost_out, bool* converged_out) {
  const auto pairs = givens_pairs(x.cols());
  std::vector<double> theta(pairs.size(), 0.0);
  double cost = zp_alignment_cost(x);
  bool converged = true;
  if (!pairs.empty()) {
    // The identity can sit on a stationary point (two clusters give rows at
    // +-45 degrees), so descend from a second start a quarter turn away.
    for (double start : {0.0, std::numbers::pi / 4.0}) {
      double c = 0.0;
      bool ok = false;
      auto t = descend(x, pairs, std::vector<double>(pairs.size(), start), options, c, ok);
      if (start == 0.0 || c < cost) {
        cost = c;
        theta = std::move(t);
        converged = ok;
      }
    }
  }
  if (cost_out != nullptr) *cost_out = cost;
  if (converged_out != nullptr) *converged_out = converged;
  return rotate(x, pairs, theta);
}

ZpSelection select_k_zp(const AffinityMatrix& a, int k_max, const ZpOptions& options) {
  const auto m = static_cast<int>(a.size());
  ZpSelection sel;
  if (m <= 1) return sel;
  // Two segments form two clusters, as with the eigengap selector.
  const int hi = m == 2 ? 2 : std::min(k_max, m);
  if (hi < 2) return sel;

  // Top eigenvectors of Deg^{-1/2} A Deg^{-1/2} are the bottom ones of L_sym.
  const SpectralDecomposition dec = laplacians(a);
  Eigen::MatrixXd rotated = dec.eigenvectors.leftCols(1);
  for (int c = 2; c <= hi; ++c) {
    Eigen::MatrixXd x(m, c);
    x.leftCols(c - 1) = rotated;
    x.col(c - 1) = dec.eigenvectors.col(c - 1);
    double cost = 0.0;
    bool converged = true;
    rotated = zp_rotate(x, options, &cost, &converged);
    sel.candidates.push_back(c);
    sel.costs.push_back(cost);
    sel.converged = sel.converged && converged;
  }
  const double best = *std::min_element(sel.costs.begin(), sel.costs.end());
  for (std::size_t i = 0; i < sel.costs.size(); ++i) {
    if (sel.costs[i] <= best + options.tie_tolerance) sel.k = sel.candidates[i];
  }
  return sel;
}

std::string_view to_string(KSelector method) { return method == KSelector::eigengap ? "eigengap" : "zp"; }

KSelector parse_selector(std::string_view text) {
  if (text == "eigengap") return KSelector::eigengap;
  if (text == "zp") return KSelector::zp;
  throw ContractError("unknown cluster-count method '" + std::string(text) + "' (expected eigengap or zp)");
}

std::vector<int> canonical_labels(const std::vector<int>& labels) {
  std::map<int, int> remap;
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    out.push_back(it->second);
  }
  return out;
}

ClusterAssignment spectral_cluster(const DistanceMatrix& d, const SpectralOptions& options) {
  const std::size_t m = d.size();
  if (m == 0) throw ContractError("spectral clustering needs at least one segment");
  ClusterAssignment out;
  out.method = options.method;
  if (m == 1) {
    out.k = 1;
    out.labels = {0};
    out.eigenvalues = {0.0};
    return out;
  }

  const AffinityMatrix a = affinity(d);
  const SpectralDecomposition dec = laplacians(a);
  const int k_max = options.k_max.value_or(default_k_max(m));
  int k = 0;
  if (options.forced_k) {
    k = *options.forced_k;
  } else if (options.method == KSelector::eigengap) {
    k = select_k_eigengap(dec, k_max);
  } else {
    k = select_k_zp(a, k_max, options.zp).k;
  }
  k = std::clamp(k, 1, static_cast<int>(m));

  KMeansOptions km;
  km.k = k;
  km.restarts = options.kmeans_restarts;
  km.max_iterations = options.kmeans_max_iterations;
  km.seed = options.seed;
  const Eigen::MatrixXd embedding = dec.eigenvectors.leftCols(k);
  const KMeansResult result = kmeans(embedding, km);

  out.labels = canonical_labels(result.labels);
  out.k = *std::max_element(out.labels.begin(), out.labels.end()) + 1;
  out.eigenvalues.assign(dec.eigenvalues.data(), dec.eigenvalues.data() + dec.eigenvalues.size());
  return out;
}

}  // namespace volregime
