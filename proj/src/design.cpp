#include "hesslasso/design.hpp"

namespace hesslasso {

Design::Design(Matrix x)
    : rows_(x.rows()), cols_(x.cols()), sparse_(false), dense_(std::move(x)) {
  compute_norms();
}

Design::Design(SparseMatrix x, Vector centers, Vector scales)
    : rows_(x.rows()),
      cols_(x.cols()),
      sparse_(true),
      sparse_matrix_(std::move(x)),
      centers_(std::move(centers)),
      scales_(std::move(scales)) {
  if (centers_.size() != cols_ || scales_.size() != cols_) {
    throw Error("sparse design: centers/scales length must equal column count");
  }
  sparse_matrix_.makeCompressed();
  compute_norms();
}

void Design::compute_norms() {
  squared_norms_.resize(cols_);
  if (!sparse_) {
    squared_norms_ = dense_.colwise().squaredNorm().transpose();
    return;
  }
  const double n = static_cast<double>(rows_);
  for (Index j = 0; j < cols_; ++j) {
    double s = 0.0;
    double s2 = 0.0;
    for (SparseMatrix::InnerIterator it(sparse_matrix_, j); it; ++it) {
      s += it.value();
      s2 += it.value() * it.value();
    }
    const double c = centers_[j];
    const double raw = s2 - 2.0 * c * s + n * c * c;
    squared_norms_[j] = raw / (scales_[j] * scales_[j]);
  }
}

double Design::density() const {
  if (!sparse_) return 1.0;
  if (rows_ == 0 || cols_ == 0) return 0.0;
  return static_cast<double>(sparse_matrix_.nonZeros()) /
         (static_cast<double>(rows_) * static_cast<double>(cols_));
}

double Design::dot(Index j, const Vector& v) const {
  if (!sparse_) return dense_.col(j).dot(v);
  double s = 0.0;
  for (SparseMatrix::InnerIterator it(sparse_matrix_, j); it; ++it) {
    s += it.value() * v[it.index()];
  }
  return (s - centers_[j] * v.sum()) / scales_[j];
}

void Design::dots(const IndexSet& columns, const Vector& v, Vector& out) const {
  if (!sparse_) {
    for (Index j : columns) out[j] = dense_.col(j).dot(v);
    return;
  }
  const double v_sum = v.sum();
  for (Index j : columns) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(sparse_matrix_, j); it; ++it) {
      s += it.value() * v[it.index()];
    }
    out[j] = (s - centers_[j] * v_sum) / scales_[j];
  }
}

Vector Design::transpose_times(const Vector& v) const {
  if (!sparse_) return dense_.transpose() * v;
  Vector out = sparse_matrix_.transpose() * v;
  const double v_sum = v.sum();
  out = (out - centers_ * v_sum).cwiseQuotient(scales_);
  return out;
}

void Design::axpy(Index j, double a, Vector& v) const {
  if (!sparse_) {
    v.noalias() += a * dense_.col(j);
    return;
  }
  const double scaled = a / scales_[j];
  for (SparseMatrix::InnerIterator it(sparse_matrix_, j); it; ++it) {
    v[it.index()] += scaled * it.value();
  }
  if (centers_[j] != 0.0) v.array() -= scaled * centers_[j];
}

Vector Design::times(const Vector& beta) const {
  Vector out = Vector::Zero(rows_);
  for (Index j = 0; j < cols_; ++j) {
    if (beta[j] != 0.0) axpy(j, beta[j], out);
  }
  return out;
}

Vector Design::column(Index j) const {
  if (!sparse_) return dense_.col(j);
  Vector out = Vector::Constant(rows_, -centers_[j]);
  for (SparseMatrix::InnerIterator it(sparse_matrix_, j); it; ++it) {
    out[it.index()] += it.value();
  }
  return out / scales_[j];
}

double Design::weighted_squared_norm(Index j, const Vector& w) const {
  if (!sparse_) return w.dot(dense_.col(j).cwiseAbs2());
  const Vector x = column(j);
  return w.dot(x.cwiseAbs2());
}

IndexSet support(const Vector& beta) {
  IndexSet out;
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0) out.push_back(j);
  }
  return out;
}

}  // namespace hesslasso
