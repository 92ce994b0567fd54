#include "routine/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "routine/error.hpp"

namespace routine {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

// ---------------------------------------------------------------------------
// DBSCAN

double dbscan_default_eps(const SymMatrix& dist, std::size_t min_pts) {
  const std::size_t n = dist.size();
  if (n < 2) return 1.0;
  const std::size_t k = std::clamp<std::size_t>(min_pts, 1, n - 1);
  std::vector<double> kth;
  kth.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row;
    row.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) row.push_back(dist(i, j));
    std::nth_element(row.begin(), row.begin() + static_cast<std::ptrdiff_t>(k - 1), row.end());
    kth.push_back(row[k - 1]);
  }
  double eps = median(std::move(kth));
  if (eps > 0.0) return eps;
  // Heavy duplication: fall back to the smallest positive distance.
  double smallest = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist(i, j) > 0.0) smallest = std::min(smallest, dist(i, j));
  return std::isfinite(smallest) ? smallest : 1.0;
}

DbscanResult dbscan(const SymMatrix& dist, const DbscanParams& params) {
  if (!(params.eps > 0.0)) throw Error("dbscan: eps must be positive");
  if (params.min_pts < 1) throw Error("dbscan: min_pts must be at least 1");
  const std::size_t n = dist.size();

  DbscanResult res;
  res.core.assign(n, false);
  res.cluster.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t count = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (dist(i, j) <= params.eps) ++count;
    res.core[i] = count >= params.min_pts;
  }

  int next_id = 0;
  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (!res.core[seed] || res.cluster[seed] >= 0) continue;
    const int id = next_id++;
    res.cluster[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      for (std::size_t q = 0; q < n; ++q) {
        if (res.core[q] && res.cluster[q] < 0 && dist(p, q) <= params.eps) {
          res.cluster[q] = id;
          stack.push_back(q);
        }
      }
    }
  }
  res.n_clusters = static_cast<std::size_t>(next_id);

  for (std::size_t i = 0; i < n; ++i) {
    if (res.core[i]) continue;
    int best_id = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n; ++c) {
      if (!res.core[c] || dist(i, c) > params.eps) continue;
      const double d = dist(i, c);
      if (d < best_d || (d == best_d && res.cluster[c] < best_id)) {
        best_d = d;
        best_id = res.cluster[c];
      }
    }
    res.cluster[i] = best_id;
  }

  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = res.cluster[i] < 0 ? Label::NonRoutine : Label::Routine;
  res.outcome = from_labels(std::move(labels));
  return res;
}

DbscanResult dbscan(std::span<const Vector> points, const DbscanParams& params) {
  return dbscan(pairwise_euclidean(points), params);
}

// ---------------------------------------------------------------------------
// Spectral clustering

SymMatrix gaussian_affinity(const SymMatrix& dist, double sigma) {
  if (!(sigma > 0.0)) throw Error("affinity bandwidth must be positive");
  const std::size_t n = dist.size();
  Matrix w(n, n);
  const double denom = 2.0 * sigma * sigma;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      w(i, j) = w(j, i) = std::exp(-dist(i, j) * dist(i, j) / denom);
  return SymMatrix(std::move(w));
}

SymMatrix graph_laplacian(const SymMatrix& affinity, LaplacianKind kind) {
  const std::size_t n = affinity.size();
  Vector degree(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) degree[i] += affinity(i, j);
  Matrix l(n, n);
  if (kind == LaplacianKind::Unnormalized) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) l(i, j) = (i == j ? degree[i] : 0.0) - affinity(i, j);
  } else {
    Vector inv_sqrt(n);
    for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        l(i, j) = (i == j && degree[i] > 0.0 ? 1.0 : 0.0) -
                  inv_sqrt[i] * affinity(i, j) * inv_sqrt[j];
  }
  // Symmetrise exactly; the normalised product can differ in the last bit.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) l(i, j) = l(j, i) = 0.5 * (l(i, j) + l(j, i));
  return SymMatrix(std::move(l));
}

SpectralResult spectral_cluster(std::span<const Vector> points, const SpectralParams& params,
                                Rng& rng) {
  if (points.size() < 3) throw Error("spectral clustering needs at least three points");
  if (params.k != 2) throw Error("spectral clustering is fixed to two clusters");
  const SymMatrix dist = pairwise_euclidean(points);
  const std::size_t n = points.size();

  SpectralResult res;
  res.partition.assign(n, 0);
  std::vector<double> nonzero;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (dist(i, j) > 0.0) nonzero.push_back(dist(i, j));
  if (nonzero.empty()) {
    res.degenerate = true;
    res.outcome = from_labels(std::vector<Label>(n, Label::Routine));
    return res;
  }
  res.sigma = params.sigma ? *params.sigma : median(std::move(nonzero));

  const SymMatrix lap = graph_laplacian(gaussian_affinity(dist, res.sigma), params.laplacian);
  const auto pairs = sym_eigen(lap, params.k);
  Points embedding(n, Vector(params.k));
  for (std::size_t c = 0; c < params.k; ++c) {
    res.eigenvalues.push_back(pairs[c].value);
    for (std::size_t i = 0; i < n; ++i) embedding[i][c] = pairs[c].vector[i];
  }
  if (params.laplacian == LaplacianKind::Symmetric) {
    for (auto& row : embedding) {
      double norm = 0.0;
      for (double v : row) norm += v * v;
      norm = std::sqrt(norm);
      if (norm > 0.0)
        for (double& v : row) v /= norm;
    }
  }

  const KMeansResult km = kmeans(embedding, params.k, rng);
  res.partition = km.assignment;
  std::size_t size[2] = {0, 0};
  for (std::size_t a : res.partition) ++size[a];
  if (size[0] == 0 || size[1] == 0) {
    res.degenerate = true;
    res.outcome = from_labels(std::vector<Label>(n, Label::Routine));
    return res;
  }

  std::size_t minority;
  if (size[0] != size[1]) {
    minority = size[0] < size[1] ? 0 : 1;
  } else {
    double spread[2] = {0.0, 0.0};
    for (std::size_t c = 0; c < 2; ++c) {
      double sum = 0.0;
      std::size_t pairs_in = 0;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
          if (res.partition[i] == c && res.partition[j] == c) {
            sum += dist(i, j);
            ++pairs_in;
          }
      spread[c] = pairs_in ? sum / static_cast<double>(pairs_in) : 0.0;
    }
    minority = spread[0] > spread[1] ? 0 : 1;
  }
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = res.partition[i] == minority ? Label::NonRoutine : Label::Routine;
  res.outcome = from_labels(std::move(labels));
  return res;
}

// ---------------------------------------------------------------------------
// Minimum covariance determinant

namespace {

struct Moments {
  Vector mean;
  Matrix cov;
  std::optional<Matrix> chol;
  double log_det = -std::numeric_limits<double>::infinity();
};

Moments moments(std::span<const Vector> points, std::span<const std::size_t> idx) {
  const std::size_t d = points.front().size();
  const double h = static_cast<double>(idx.size());
  Moments m{Vector(d, 0.0), Matrix(d, d), std::nullopt,
            -std::numeric_limits<double>::infinity()};
  for (std::size_t i : idx)
    for (std::size_t a = 0; a < d; ++a) m.mean[a] += points[i][a];
  for (double& v : m.mean) v /= h;
  for (std::size_t i : idx)
    for (std::size_t a = 0; a < d; ++a) {
      const double da = points[i][a] - m.mean[a];
      for (std::size_t b = a; b < d; ++b) m.cov(a, b) += da * (points[i][b] - m.mean[b]);
    }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) m.cov(b, a) = m.cov(a, b) /= h;
  m.chol = cholesky(m.cov);
  if (m.chol) m.log_det = log_det_from_cholesky(*m.chol);
  return m;
}

Matrix with_ridge(Matrix cov) {
  const std::size_t d = cov.rows();
  double trace = 0.0;
  for (std::size_t a = 0; a < d; ++a) trace += cov(a, a);
  const double ridge = 1e-6 * trace / static_cast<double>(d);
  for (std::size_t a = 0; a < d; ++a) cov(a, a) += ridge;
  return cov;
}

// Indices of the h points closest under (mean, chol), sorted ascending.
std::vector<std::size_t> closest(std::span<const Vector> points, const Vector& mean,
                                 const Matrix& chol, std::size_t h) {
  const std::size_t n = points.size();
  std::vector<double> d2(n);
  Vector diff(mean.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < mean.size(); ++a) diff[a] = points[i][a] - mean[a];
    d2[i] = quad_form_inverse(chol, diff);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d2[a] < d2[b]; });
  order.resize(h);
  std::sort(order.begin(), order.end());
  return order;
}

std::optional<Matrix> usable_cholesky(const Moments& m) {
  if (m.chol) return m.chol;
  return cholesky(with_ridge(m.cov));
}

}  // namespace

EnvelopeModel make_envelope(Vector location, Matrix covariance) {
  if (covariance.rows() != location.size() || covariance.cols() != location.size())
    throw Error("envelope location and covariance disagree in dimension");
  auto chol = cholesky(covariance);
  if (!chol) throw Error("envelope covariance is not positive definite");
  EnvelopeModel m;
  m.location = std::move(location);
  m.covariance = std::move(covariance);
  m.cholesky = std::move(*chol);
  return m;
}

EnvelopeModel fit_envelope(std::span<const Vector> points, const EnvelopeParams& params,
                           Rng& rng) {
  const std::size_t d = check_points(points);
  const std::size_t n = points.size();
  if (n <= d) throw Error("robust covariance needs more points than dimensions");
  if (!(params.support_fraction > 0.5 && params.support_fraction <= 1.0))
    throw Error("support fraction must lie in (0.5, 1]");
  const auto h_frac =
      static_cast<std::size_t>(std::ceil(params.support_fraction * static_cast<double>(n) - 1e-9));
  const std::size_t h = std::min(n, std::max(h_frac, (n + d + 1) / 2));

  std::vector<std::size_t> best_support;
  std::vector<double> best_history;
  double best = std::numeric_limits<double>::infinity();
  std::size_t csteps = 0;

  for (std::size_t trial = 0; trial < std::max<std::size_t>(params.trials, 1); ++trial) {
    // Random (d+1)-subset, grown until its covariance is non-singular.
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    std::size_t take = d + 1;
    Moments init = moments(points, std::span(perm).first(take));
    while (!init.chol && take < n) init = moments(points, std::span(perm).first(++take));
    const auto init_chol = usable_cholesky(init);
    if (!init_chol) continue;

    std::vector<std::size_t> support = closest(points, init.mean, *init_chol, h);
    Moments cur = moments(points, support);
    std::vector<double> history{cur.log_det};
    for (std::size_t step = 0; step < params.max_csteps && cur.chol; ++step) {
      auto next_support = closest(points, cur.mean, *cur.chol, h);
      if (next_support == support) break;
      Moments next = moments(points, next_support);
      ++csteps;
      if (next.log_det > cur.log_det + 1e-9 * std::max(1.0, std::abs(cur.log_det)))
        throw Error("C-step increased the covariance determinant");
      const bool improved = next.log_det < cur.log_det;
      support = std::move(next_support);
      cur = std::move(next);
      history.push_back(cur.log_det);
      if (!improved) break;
    }
    if (cur.log_det < best || best_support.empty()) {
      best = cur.log_det;
      best_support = support;
      best_history = std::move(history);
    }
  }
  if (best_support.empty()) throw Error("robust covariance: degenerate data");

  const Moments final_m = moments(points, best_support);
  EnvelopeModel model;
  try {
    model = make_envelope(final_m.mean, with_ridge(final_m.cov));
  } catch (const Error&) {
    throw Error("robust covariance is degenerate even after ridge regularisation");
  }
  model.support_fraction = params.support_fraction;
  model.support = std::move(best_support);
  model.log_det_history = std::move(best_history);
  model.csteps = csteps;
  return model;
}

double mahalanobis_sq(const EnvelopeModel& model, std::span<const double> x) {
  if (x.size() != model.location.size()) throw Error("dimension mismatch in Mahalanobis distance");
  Vector diff(x.size());
  for (std::size_t a = 0; a < x.size(); ++a) diff[a] = x[a] - model.location[a];
  return quad_form_inverse(model.cholesky, diff);
}

DetectionOutcome detect_envelope(std::span<const Vector> points, const EnvelopeParams& params,
                                 double contamination, Rng& rng) {
  const EnvelopeModel model = fit_envelope(points, params, rng);
  std::vector<double> scores;
  scores.reserve(points.size());
  for (const auto& p : points) scores.push_back(mahalanobis_sq(model, p));
  return decide(scores, contamination);
}

// ---------------------------------------------------------------------------
// One-class SVM

double scale_gamma(std::span<const Vector> points) {
  const std::size_t d = check_points(points);
  double mean = 0.0;
  std::size_t count = 0;
  for (const auto& p : points)
    for (double v : p) {
      mean += v;
      ++count;
    }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (const auto& p : points)
    for (double v : p) var += (v - mean) * (v - mean);
  var /= static_cast<double>(count);
  return var > 0.0 ? 1.0 / (static_cast<double>(d) * var) : 1.0;
}

OcsvmModel fit_ocsvm(std::span<const Vector> points, const OcsvmParams& params) {
  check_points(points);
  const std::size_t n = points.size();
  if (n < 2) throw Error("one-class SVM needs at least two points");
  if (!(params.nu > 0.0 && params.nu <= 1.0)) throw Error("nu must lie in (0, 1]");

  OcsvmModel m;
  m.nu = params.nu;
  m.gamma = params.gamma ? *params.gamma : scale_gamma(points);
  if (!(m.gamma > 0.0)) throw Error("RBF gamma must be positive");
  m.points.assign(points.begin(), points.end());
  const double nu_n = params.nu * static_cast<double>(n);
  const double c = 1.0 / nu_n;
  m.upper_bound = c;

  Matrix k(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    k(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j)
      k(i, j) = k(j, i) = std::exp(-m.gamma * squared_distance(points[i], points[j]));
  }

  // Feasible start: the first floor(nu n) multipliers at the bound, the
  // remainder of the unit mass on the next one.
  m.alpha.assign(n, 0.0);
  const auto full = std::min(n, static_cast<std::size_t>(std::floor(nu_n + 1e-9)));
  for (std::size_t i = 0; i < full; ++i) m.alpha[i] = c;
  if (full < n) m.alpha[full] = std::max(0.0, 1.0 - static_cast<double>(full) * c);

  Vector grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) grad[i] += k(i, j) * m.alpha[j];
  auto objective = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += m.alpha[i] * grad[i];
    return 0.5 * s;
  };
  m.objective_history.push_back(objective());

  bool converged = false;
  for (m.iterations = 0; m.iterations < params.max_iterations; ++m.iterations) {
    // Mass moves from j (largest gradient, alpha > 0) to i (smallest, alpha < C).
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (m.alpha[t] < c && (i == n || grad[t] < grad[i])) i = t;
      if (m.alpha[t] > 0.0 && (j == n || grad[t] > grad[j])) j = t;
    }
    m.kkt_violation = (i == n || j == n) ? 0.0 : grad[j] - grad[i];
    if (m.kkt_violation <= params.tolerance) {
      converged = true;
      break;
    }
    const double eta = std::max(k(i, i) + k(j, j) - 2.0 * k(i, j), 1e-12);
    const double room_i = c - m.alpha[i];
    const double room_j = m.alpha[j];
    double step = m.kkt_violation / eta;
    if (step >= room_i || step >= room_j) step = std::min(room_i, room_j);
    m.alpha[i] = step == room_i ? c : m.alpha[i] + step;
    m.alpha[j] = step == room_j ? 0.0 : m.alpha[j] - step;
    for (std::size_t t = 0; t < n; ++t) grad[t] += step * (k(t, i) - k(t, j));
    m.objective_history.push_back(objective());
  }
  if (!converged)
    throw ConvergenceError("one-class SVM did not converge", m.kkt_violation);

  double free_sum = 0.0;
  std::size_t free_count = 0;
  double upper = std::numeric_limits<double>::infinity();   // min over alpha = 0
  double lower = -std::numeric_limits<double>::infinity();  // max over alpha = C
  for (std::size_t t = 0; t < n; ++t) {
    if (m.alpha[t] > 0.0 && m.alpha[t] < c) {
      free_sum += grad[t];
      ++free_count;
    } else if (m.alpha[t] == 0.0) {
      upper = std::min(upper, grad[t]);
    } else {
      lower = std::max(lower, grad[t]);
    }
  }
  if (free_count > 0) {
    m.rho = free_sum / static_cast<double>(free_count);
  } else if (std::isfinite(upper) && std::isfinite(lower)) {
    m.rho = 0.5 * (upper + lower);
  } else {
    m.rho = std::isfinite(upper) ? upper : lower;
  }
  return m;
}

double decision_function(const OcsvmModel& model, std::span<const double> x) {
  if (model.points.empty() || x.size() != model.points.front().size())
    throw Error("dimension mismatch in one-class SVM decision");
  double s = 0.0;
  for (std::size_t i = 0; i < model.points.size(); ++i)
    if (model.alpha[i] > 0.0)
      s += model.alpha[i] * std::exp(-model.gamma * squared_distance(model.points[i], x));
  return s - model.rho;
}

DetectionOutcome detect_ocsvm(std::span<const Vector> points, const OcsvmParams& params) {
  const OcsvmModel model = fit_ocsvm(points, params);
  DetectionOutcome out;
  // Margin support vectors sit at f = 0 only up to the solver tolerance, so
  // a point counts as outside when f < -tolerance.
  out.threshold = std::nextafter(params.tolerance, std::numeric_limits<double>::infinity());
  for (const auto& p : points) {
    const double f = decision_function(model, p);
    out.scores.push_back(-f);
    out.decisions.push_back(-f >= out.threshold ? Label::NonRoutine : Label::Routine);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::size_t reduced_dimension(std::size_t n) noexcept {
  return n >= 3 ? std::min<std::size_t>(n - 2, 10) : 1;
}

Points reduce_for_covariance(std::span<const Vector> points) {
  const std::size_t d = check_points(points);
  const std::size_t target = reduced_dimension(points.size());
  if (d <= target) return Points(points.begin(), points.end());
  return pca_project(points, target).coords;
}

}  // namespace routine
