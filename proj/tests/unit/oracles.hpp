// Deliberately naive reference implementations used only by the tests.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "routine/dataset.hpp"
#include "routine/iforest.hpp"
#include "routine/numerics.hpp"
#include "routine/rng.hpp"

namespace oracle {

using routine::Points;
using routine::Vector;

inline double distance(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

inline std::vector<std::vector<double>> distances(const Points& x) {
  std::vector<std::vector<double>> d(x.size(), std::vector<double>(x.size()));
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) d[i][j] = distance(x[i], x[j]);
  return d;
}

inline Points random_points(routine::Rng& rng, std::size_t n, std::size_t d, double scale = 1.0) {
  Points x(n, Vector(d));
  for (auto& p : x)
    for (double& v : p) v = scale * rng.normal();
  return x;
}

inline routine::SymMatrix random_symmetric(routine::Rng& rng, std::size_t n) {
  routine::Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.uniform(-1.0, 1.0);
  return routine::SymMatrix(m);
}

/// Number of eigenvalues below `sigma`: negative pivots of the LDL^T
/// factorisation of A - sigma I (Sylvester's law of inertia).
inline std::size_t count_below(const routine::SymMatrix& a, double sigma) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> m(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[i][j] = a(i, j) - (i == j ? sigma : 0.0);
  std::size_t negatives = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double p = m[k][k];
    if (p == 0.0) p = 1e-300;
    if (p < 0.0) ++negatives;
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = m[i][k] / p;
      for (std::size_t j = k + 1; j < n; ++j) m[i][j] -= f * m[k][j];
    }
  }
  return negatives;
}

/// All eigenvalues by bisection on the inertia count.
inline std::vector<double> eigenvalues_by_bisection(const routine::SymMatrix& a) {
  const std::size_t n = a.size();
  double r = 0.0;  // Gershgorin bound
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += std::abs(a(i, j));
    r = std::max(r, s);
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < n; ++k) {
    double lo = -r - 1.0, hi = r + 1.0;  // find the (k+1)-th smallest
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (count_below(a, mid) > k)
        hi = mid;
      else
        lo = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

/// DBSCAN by explicit transitive closure over core points. Border points
/// take the cluster of their nearest core neighbour, lowest id on ties.
/// Cluster ids are ordered by the smallest core index in each cluster.
inline std::vector<int> dbscan(const std::vector<std::vector<double>>& d, double eps,
                               std::size_t min_pts) {
  const std::size_t n = d.size();
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < n; ++j) c += d[i][j] <= eps;
    core[i] = c >= min_pts;
  }
  // reach[i][j]: core i and core j connected through a chain of cores.
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      reach[i][j] = core[i] && core[j] && (i == j || d[i][j] <= eps);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  std::vector<int> label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] >= 0) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) label[j] = next;
    ++next;
  }
  std::vector<int> out = label;
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = INFINITY;
    for (std::size_t j = 0; j < n; ++j) {
      if (!core[j] || d[i][j] > eps) continue;
      if (d[i][j] < best || (d[i][j] == best && label[j] < out[i])) {
        best = d[i][j];
        out[i] = label[j];
      }
    }
  }
  return out;
}

/// True when two labelings agree up to a bijective renaming of non-negative
/// ids (-1 must match -1).
inline bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> ab, ba;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if ((a[i] < 0) != (b[i] < 0)) return false;
    if (a[i] < 0) continue;
    auto [x, fresh_x] = ab.emplace(a[i], b[i]);
    auto [y, fresh_y] = ba.emplace(b[i], a[i]);
    if (x->second != b[i] || y->second != a[i]) return false;
  }
  return true;
}

/// Recursive descent written against the node semantics directly.
inline double path_length(const routine::IsoTree& t, const std::vector<double>& x,
                          int node = 0, int depth = 0) {
  const auto& nd = t.nodes[static_cast<std::size_t>(node)];
  if (nd.feature < 0) {
    const double m = static_cast<double>(nd.size);
    double c = 0.0;
    if (nd.size > 1) {
      c = 2.0 * (std::log(m - 1.0) + 0.5772156649) - 2.0 * (m - 1.0) / m;
    }
    return depth + c;
  }
  const bool left = x[static_cast<std::size_t>(nd.feature)] < nd.split;
  return path_length(t, x, left ? nd.left : nd.right, depth + 1);
}

}  // namespace oracle
