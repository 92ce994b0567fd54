#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "routine/detection.hpp"
#include "routine/numerics.hpp"
#include "routine/rng.hpp"

namespace routine {

// ---------------------------------------------------------------------------
// DBSCAN

struct DbscanParams {
  double eps = 0.0;
  std::size_t min_pts = 3;
};

struct DbscanResult {
  /// Cluster id per point, -1 for noise. Ids follow the smallest core index
  /// of each cluster.
  std::vector<int> cluster;
  std::vector<bool> core;
  std::size_t n_clusters = 0;
  DetectionOutcome outcome;  // noise -> NonRoutine
};

/// Median over points of the distance to the min_pts-th nearest other point.
double dbscan_default_eps(const SymMatrix& dist, std::size_t min_pts);

/// Core points have >= min_pts points (self included) within eps. A border
/// point joins the cluster of its nearest core neighbour; equal distances
/// go to the lowest cluster id.
DbscanResult dbscan(const SymMatrix& dist, const DbscanParams& params);
DbscanResult dbscan(std::span<const Vector> points, const DbscanParams& params);

// ---------------------------------------------------------------------------
// Spectral clustering

enum class LaplacianKind { Unnormalized, Symmetric };

struct SpectralParams {
  std::size_t k = 2;
  std::optional<double> sigma;  // nullopt: median of non-zero distances
  LaplacianKind laplacian = LaplacianKind::Unnormalized;
};

struct SpectralResult {
  std::vector<std::size_t> partition;
  std::vector<double> eigenvalues;
  double sigma = 0.0;
  bool degenerate = false;
  DetectionOutcome outcome;  // minority cluster -> NonRoutine
};

/// exp(-d^2 / (2 sigma^2)) with a zero diagonal.
SymMatrix gaussian_affinity(const SymMatrix& dist, double sigma);
SymMatrix graph_laplacian(const SymMatrix& affinity, LaplacianKind kind);

SpectralResult spectral_cluster(std::span<const Vector> points, const SpectralParams& params,
                                Rng& rng);

// ---------------------------------------------------------------------------
// Robust covariance (minimum covariance determinant)

struct EnvelopeParams {
  double support_fraction = 0.75;
  std::size_t trials = 500;
  std::size_t max_csteps = 100;
};

struct EnvelopeModel {
  Vector location;
  Matrix covariance;  // ridge-regularised
  Matrix cholesky;
  double support_fraction = 0.0;
  std::vector<std::size_t> support;
  /// log det of the raw support covariance after each C-step of the
  /// winning trial.
  std::vector<double> log_det_history;
  std::size_t csteps = 0;  // C-steps run over all trials
};

/// Model from an explicit location and (already regularised) covariance.
EnvelopeModel make_envelope(Vector location, Matrix covariance);

/// FAST-MCD style search. Each C-step is checked to not increase the
/// determinant; a violation throws.
EnvelopeModel fit_envelope(std::span<const Vector> points, const EnvelopeParams& params,
                           Rng& rng);

double mahalanobis_sq(const EnvelopeModel& model, std::span<const double> x);

DetectionOutcome detect_envelope(std::span<const Vector> points, const EnvelopeParams& params,
                                 double contamination, Rng& rng);

// ---------------------------------------------------------------------------
// One-class SVM

struct OcsvmParams {
  double nu = 0.3;
  std::optional<double> gamma;  // nullopt: 1 / (d * var(X))
  double tolerance = 1e-6;
  std::size_t max_iterations = 100000;
};

struct OcsvmModel {
  double nu = 0.0;
  double gamma = 0.0;
  double rho = 0.0;
  double upper_bound = 0.0;  // 1 / (nu * n)
  Vector alpha;              // over all training points
  Points points;             // training points
  std::size_t iterations = 0;
  double kkt_violation = 0.0;
  std::vector<double> objective_history;
};

double scale_gamma(std::span<const Vector> points);

/// Dual solved by maximal-violating-pair SMO updates.
OcsvmModel fit_ocsvm(std::span<const Vector> points, const OcsvmParams& params);

/// sum_i alpha_i k(x_i, x) - rho; negative outside the learned support.
double decision_function(const OcsvmModel& model, std::span<const double> x);

/// Score is -f(x); flagged when f(x) < -tolerance.
DetectionOutcome detect_ocsvm(std::span<const Vector> points, const OcsvmParams& params);

// ---------------------------------------------------------------------------

/// Target dimension for covariance-based methods on n days: min(n - 2, 10).
std::size_t reduced_dimension(std::size_t n) noexcept;

/// PCA coordinates when the points have more than reduced_dimension(n)
/// dimensions, otherwise the points unchanged.
Points reduce_for_covariance(std::span<const Vector> points);

}  // namespace routine
