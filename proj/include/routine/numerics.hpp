#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "routine/rng.hpp"

namespace routine {

using Vector = std::vector<double>;
using Points = std::vector<Vector>;

/// Dense row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }

  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  /// Max absolute row sum.
  double norm_inf() const noexcept;

  const std::vector<double>& data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Square matrix checked symmetric (within 1e-12 relative to its largest
/// entry) and finite at construction.
class SymMatrix {
 public:
  explicit SymMatrix(Matrix m);

  std::size_t size() const noexcept { return m_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }

 private:
  Matrix m_;
};

/// Throws if the points are empty, ragged or non-finite; returns the dimension.
std::size_t check_points(std::span<const Vector> points);

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

SymMatrix pairwise_euclidean(std::span<const Vector> points);

struct EigenPair {
  double value = 0.0;
  Vector vector;
};

/// The k smallest eigenpairs, ascending, by cyclic Jacobi rotations.
/// Each eigenvector is unit length with its largest-magnitude entry positive.
std::vector<EigenPair> sym_eigen(const SymMatrix& m, std::size_t k);

/// Lower-triangular Cholesky factor, or nullopt if `a` is not positive
/// definite.
std::optional<Matrix> cholesky(const Matrix& a);

/// log det(A) = 2 * sum(log L_ii).
double log_det_from_cholesky(const Matrix& chol) noexcept;

/// ||L^-1 v||^2, i.e. v^T A^-1 v for A = L L^T.
double quad_form_inverse(const Matrix& chol, std::span<const double> v);

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Points centroids;
  /// Objective after every assignment step.
  std::vector<double> objective_history;
  std::size_t iterations = 0;

  double objective() const noexcept {
    return objective_history.empty() ? 0.0 : objective_history.back();
  }
};

/// Lloyd's algorithm from k-means++ seeding. Stops when the assignment is
/// stable or after `max_iterations` passes. An empty cluster is re-seeded at
/// the point farthest from its current centroid.
KMeansResult kmeans(std::span<const Vector> points, std::size_t k, Rng& rng,
                    std::size_t max_iterations = 300);

struct PcaResult {
  Points coords;               // n x k
  Vector explained;            // fraction of total variance per component
  Vector variances;            // covariance eigenvalues, descending
  Points components;           // k x d, unit vectors
  Vector mean;
};

/// Projects mean-centred points on the top-k eigenvectors of their sample
/// covariance. When d > n the n x n Gram matrix is decomposed instead; it has
/// the same non-zero spectrum.
PcaResult pca_project(std::span<const Vector> points, std::size_t k = 2);

}  // namespace routine
