#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hesslasso {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Sorted list of predictor indices (0-based) unless stated otherwise.
using IndexSet = std::vector<Index>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a Gram block cannot be inverted even after preconditioning.
class SingularError : public Error {
 public:
  using Error::Error;
};

/**
 * Read-only view of a design matrix.
 *
 * Dense designs are used as stored. Sparse designs carry per-column centers and
 * scales and are standardized on the fly, so column j behaves as
 * (x_j - center_j) / scale_j without ever being densified.
 */
class Design {
 public:
  Design() = default;
  explicit Design(Matrix x);
  Design(SparseMatrix x, Vector centers, Vector scales);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  bool is_sparse() const { return sparse_; }

  /// Fraction of stored nonzeros (1 for dense designs).
  double density() const;

  /// x_j^T v
  double dot(Index j, const Vector& v) const;

  /// x_j^T v for every j in `columns`, written to out[j].
  void dots(const IndexSet& columns, const Vector& v, Vector& out) const;

  /// X^T v
  Vector transpose_times(const Vector& v) const;

  /// v += a * x_j
  void axpy(Index j, double a, Vector& v) const;

  /// X * beta, skipping zero coefficients.
  Vector times(const Vector& beta) const;

  /// Materialized (standardized) column.
  Vector column(Index j) const;

  double squared_norm(Index j) const { return squared_norms_[j]; }
  const Vector& squared_norms() const { return squared_norms_; }

  /// sum_i w_i x_ij^2
  double weighted_squared_norm(Index j, const Vector& w) const;

  const Matrix& dense() const { return dense_; }
  const SparseMatrix& sparse() const { return sparse_matrix_; }
  const Vector& centers() const { return centers_; }
  const Vector& scales() const { return scales_; }

 private:
  void compute_norms();

  Index rows_ = 0;
  Index cols_ = 0;
  bool sparse_ = false;
  Matrix dense_;
  SparseMatrix sparse_matrix_;
  Vector centers_;
  Vector scales_;
  Vector squared_norms_;
};

/// Nonzero indices of a coefficient vector, sorted.
IndexSet support(const Vector& beta);

}  // namespace hesslasso
