#include "routine/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "routine/error.hpp"

namespace routine {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double Matrix::norm_inf() const noexcept {
  double best = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
    best = std::max(best, s);
  }
  return best;
}

SymMatrix::SymMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) throw Error("symmetric matrix must be square");
  double scale = 1.0;
  for (double v : m_.data()) {
    if (!std::isfinite(v)) throw Error("matrix has non-finite entries");
    scale = std::max(scale, std::abs(v));
  }
  const std::size_t n = m_.rows();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(m_(i, j) - m_(j, i)) > 1e-12 * scale)
        throw Error("matrix is not symmetric");
}

std::size_t check_points(std::span<const Vector> points) {
  if (points.empty()) throw Error("empty point set");
  const std::size_t d = points.front().size();
  for (const auto& p : points) {
    if (p.size() != d) throw Error("points have mismatched dimensions");
    for (double v : p)
      if (!std::isfinite(v)) throw Error("point has non-finite coordinates");
  }
  return d;
}

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

SymMatrix pairwise_euclidean(std::span<const Vector> points) {
  check_points(points);
  const std::size_t n = points.size();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = std::sqrt(squared_distance(points[i], points[j]));
  return SymMatrix(std::move(d));
}

namespace {

void normalize_sign(Vector& v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::abs(v[i]) > std::abs(v[best])) best = i;
  if (!v.empty() && v[best] < 0.0)
    for (double& x : v) x = -x;
}

// Full decomposition; eigenvalues in `values`, eigenvectors in columns of `vecs`.
void jacobi(Matrix a, Vector& values, Matrix& vecs) {
  const std::size_t n = a.rows();
  vecs = Matrix::identity(n);
  double frob = 0.0;
  for (double v : a.data()) frob += v * v;
  frob = std::sqrt(frob);
  const double target = 1e-15 * std::max(frob, std::numeric_limits<double>::min());

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= target) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = vecs(k, p);
          const double vkq = vecs(k, q);
          vecs(k, p) = c * vkp - s * vkq;
          vecs(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  values.resize(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a(i, i);
}

std::vector<EigenPair> all_eigenpairs(const Matrix& m) {
  Vector values;
  Matrix vecs;
  jacobi(m, values, vecs);
  const std::size_t n = m.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<EigenPair> out;
  out.reserve(n);
  for (std::size_t idx : order) {
    EigenPair e{values[idx], Vector(n)};
    for (std::size_t r = 0; r < n; ++r) e.vector[r] = vecs(r, idx);
    normalize_sign(e.vector);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace

std::vector<EigenPair> sym_eigen(const SymMatrix& m, std::size_t k) {
  if (k < 1 || k > m.size()) throw Error("sym_eigen: k must lie in [1, n]");
  auto pairs = all_eigenpairs(m.matrix());
  pairs.resize(k);
  return pairs;
}

std::optional<Matrix> cholesky(const Matrix& a) {
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0) || !std::isfinite(diag)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

double log_det_from_cholesky(const Matrix& chol) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < chol.rows(); ++i) s += std::log(chol(i, i));
  return 2.0 * s;
}

double quad_form_inverse(const Matrix& chol, std::span<const double> v) {
  const std::size_t n = chol.rows();
  if (v.size() != n) throw Error("dimension mismatch in quadratic form");
  Vector y(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = v[i];
    for (std::size_t k = 0; k < i; ++k) t -= chol(i, k) * y[k];
    y[i] = t / chol(i, i);
    s += y[i] * y[i];
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t nearest(std::span<const double> p, const Points& centroids, double& dist) {
  std::size_t best = 0;
  dist = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < dist) {
      dist = d;
      best = c;
    }
  }
  return best;
}

Points kmeanspp_seed(std::span<const Vector> points, std::size_t k, Rng& rng) {
  const std::size_t n = points.size();
  Points centroids;
  centroids.push_back(points[rng.below(n)]);
  Vector d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], centroids[0]);
  while (centroids.size() < k) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t pick = n - 1;
    if (total > 0.0) {
      const double r = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (r < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = rng.below(n);
    }
    centroids.push_back(points[pick]);
    for (std::size_t i = 0; i < n; ++i)
      d2[i] = std::min(d2[i], squared_distance(points[i], centroids.back()));
  }
  return centroids;
}

}  // namespace

KMeansResult kmeans(std::span<const Vector> points, std::size_t k, Rng& rng,
                    std::size_t max_iterations) {
  const std::size_t d = check_points(points);
  const std::size_t n = points.size();
  if (k < 1 || k > n) throw Error("kmeans: k must lie in [1, number of points]");

  KMeansResult res;
  res.centroids = kmeanspp_seed(points, k, rng);
  res.assignment.assign(n, 0);
  std::vector<std::size_t> previous;
  Vector dist(n);

  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      res.assignment[i] = nearest(points[i], res.centroids, dist[i]);
      objective += dist[i];
    }
    res.objective_history.push_back(objective);
    res.iterations = iter + 1;
    if (res.assignment == previous) break;
    previous = res.assignment;

    Points sums(k, Vector(d, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[res.assignment[i]];
      for (std::size_t j = 0; j < d; ++j) s[j] += points[i][j];
      ++counts[res.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) continue;
      for (std::size_t j = 0; j < d; ++j)
        res.centroids[c][j] = sums[c][j] / static_cast<double>(counts[c]);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] != 0) continue;
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double di = squared_distance(points[i], res.centroids[res.assignment[i]]);
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      res.centroids[c] = points[far];
    }
  }
  return res;
}

PcaResult pca_project(std::span<const Vector> points, std::size_t k) {
  const std::size_t d = check_points(points);
  const std::size_t n = points.size();
  if (n < 2) throw Error("PCA needs at least two points");
  if (k < 1 || k > d) throw Error("PCA: k must lie in [1, dimension]");

  PcaResult res;
  res.mean.assign(d, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < d; ++j) res.mean[j] += p[j];
  for (double& m : res.mean) m /= static_cast<double>(n);
  Points centred(n, Vector(d));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) centred[i][j] = points[i][j] - res.mean[j];
  const double denom = static_cast<double>(n - 1);

  double trace = 0.0;
  if (d <= n) {
    Matrix cov(d, d);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = a; b < d; ++b) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += centred[i][a] * centred[i][b];
        cov(a, b) = cov(b, a) = s / denom;
      }
    for (std::size_t a = 0; a < d; ++a) trace += cov(a, a);
    auto pairs = all_eigenpairs(cov);
    for (std::size_t c = 0; c < k; ++c) {
      auto& e = pairs[d - 1 - c];
      res.variances.push_back(std::max(0.0, e.value));
      res.components.push_back(std::move(e.vector));
    }
  } else {
    Matrix gram(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a; b < n; ++b) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += centred[a][j] * centred[b][j];
        gram(a, b) = gram(b, a) = s / denom;
      }
    for (std::size_t a = 0; a < n; ++a) trace += gram(a, a);
    auto pairs = all_eigenpairs(gram);
    for (std::size_t c = 0; c < k; ++c) {
      const EigenPair& e = c < n ? pairs[n - 1 - c] : EigenPair{0.0, Vector(n, 0.0)};
      const double var = std::max(0.0, e.value);
      Vector comp(d, 0.0);
      if (var > 1e-14 * std::max(trace, 1e-300)) {
        const double scale = 1.0 / std::sqrt(var * denom);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) comp[j] += centred[i][j] * e.vector[i] * scale;
        normalize_sign(comp);
      }
      res.variances.push_back(var);
      res.components.push_back(std::move(comp));
    }
  }

  res.coords.assign(n, Vector(k, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < k; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += centred[i][j] * res.components[c][j];
      res.coords[i][c] = s;
    }
  for (double v : res.variances)
    res.explained.push_back(trace > 0.0 ? std::clamp(v / trace, 0.0, 1.0) : 0.0);
  return res;
}

}  // namespace routine
