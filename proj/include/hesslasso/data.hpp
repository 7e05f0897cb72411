#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hesslasso/design.hpp"
#include "hesslasso/losses.hpp"

namespace hesslasso {

/// Simulation settings: rows drawn from N(0, Sigma) with compound-symmetric
/// Sigma (unit diagonal, rho off the diagonal) and s unit coefficients spread
/// evenly over the p predictors.
struct SimSpec {
  Index n = 200;
  Index p = 2000;
  double rho = 0.0;
  Index s = 20;
  /// Signal-to-noise ratio beta^T Sigma beta / sigma^2 (gaussian response only);
  /// infinity gives a noiseless response.
  double snr = 2.0;
  std::uint64_t seed = 0;
  LossKind response = LossKind::least_squares;
};

struct SimData {
  Matrix x;
  Vector y;
  Vector beta_true;
};

/// 0-based positions of the nonzero true coefficients, floor(j p / s).
IndexSet true_support(Index p, Index s);

SimData simulate(const SimSpec& spec);

struct StandardizedData {
  Design x;
  Vector y;
  Vector centers;
  Vector scales;
  IndexSet constant_columns;
  double y_center = 0.0;
};

/// Center and scale columns by mean and uncorrected standard deviation; center
/// y for least squares. Constant columns get scale 1 and are reported.
StandardizedData standardize(const Matrix& x, const Vector& y, LossKind kind);

/// Sparse variant; the design stays sparse and is standardized implicitly.
StandardizedData standardize(const SparseMatrix& x, const Vector& y, LossKind kind);

struct LibsvmData {
  SparseMatrix x;
  Vector y;
};

/// Parse `label idx:val ...` lines (1-based, strictly increasing indices).
/// With `binary_labels`, labels {-1, +1} are mapped to {0, 1}.
LibsvmData parse_libsvm(std::istream& in, bool binary_labels = false);
LibsvmData load_libsvm(const std::string& path, bool binary_labels = false);
void write_libsvm(std::ostream& out, const SparseMatrix& x, const Vector& y);

/// Pairs (first, duplicate) of exactly identical columns.
std::vector<std::pair<Index, Index>> duplicate_columns(const SparseMatrix& x);
std::vector<std::pair<Index, Index>> duplicate_columns(const Matrix& x);

/// Copy of `x` without the listed columns.
SparseMatrix drop_columns(const SparseMatrix& x, const IndexSet& columns);
Matrix drop_columns(const Matrix& x, const IndexSet& columns);

}  // namespace hesslasso
