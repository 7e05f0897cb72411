#include "hesslasso/gram.hpp"

#include <algorithm>
#include <unordered_map>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace hesslasso {

namespace {

using u64 = std::uint64_t;

u64 cube(Index a) { return static_cast<u64>(a) * static_cast<u64>(a) * static_cast<u64>(a); }
u64 prod(Index a, Index b, Index c) {
  return static_cast<u64>(a) * static_cast<u64>(b) * static_cast<u64>(c);
}

/// Dense copies of the requested standardized columns.
Matrix gather_columns(const Design& x, const IndexSet& cols) {
  Matrix out(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = x.column(cols[k]);
  return out;
}

Matrix weighted(const Matrix& cols, const Vector* weights) {
  if (weights == nullptr) return cols;
  return weights->asDiagonal() * cols;
}

/// Smallest Cholesky pivot, or -1 if the factorization fails.
double smallest_pivot(const Eigen::LLT<Matrix>& llt) {
  if (llt.info() != Eigen::Success) return -1.0;
  const Matrix l = llt.matrixL();
  return l.diagonal().cwiseAbs2().minCoeff();
}

Matrix shifted(const Matrix& h, double alpha) {
  Matrix out = h;
  out.diagonal().array() += alpha;
  return out;
}

/// V (Lambda + shift I)^{-1} V^T
Matrix spectral_inverse(const Eigen::SelfAdjointEigenSolver<Matrix>& eig, double shift) {
  const Vector inv = (eig.eigenvalues().array() + shift).inverse().matrix();
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

/// Inverse of (hessian + latched) when latched > 0, or of hessian with
/// preconditioning decided by the cheap pivot test followed by an eigensolve.
PreconditionResult invert(const Matrix& hessian, double alpha_candidate, double latched,
                          u64& flops) {
  const Index k = hessian.rows();
  flops += cube(k);
  if (k == 0) return {Matrix(0, 0), latched};
  if (latched > 0.0) {
    Eigen::LLT<Matrix> llt(shifted(hessian, latched));
    if (llt.info() == Eigen::Success) {
      return {llt.solve(Matrix::Identity(k, k)), latched};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
    return {spectral_inverse(eig, latched), latched};
  }
  Eigen::LLT<Matrix> llt(hessian);
  if (smallest_pivot(llt) >= alpha_candidate) {
    return {llt.solve(Matrix::Identity(k, k)), 0.0};
  }
  flops += cube(k);
  return precondition(hessian, alpha_candidate);
}

}  // namespace

PreconditionResult precondition(const Matrix& hessian, double alpha) {
  const Index k = hessian.rows();
  if (k == 0) return {Matrix(0, 0), 0.0};
  Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian);
  const double applied = eig.eigenvalues().minCoeff() < alpha ? alpha : 0.0;
  return {spectral_inverse(eig, applied), applied};
}

GramState build_gram(const IndexSet& active, const Design& x, const Vector* weights,
                     double alpha_candidate, double latched_alpha) {
  GramState out;
  out.active = active;
  const Index k = static_cast<Index>(active.size());
  const Matrix cols = gather_columns(x, active);
  out.hessian = cols.transpose() * weighted(cols, weights);
  out.flops += prod(x.rows(), k, k);
  auto inv = invert(out.hessian, alpha_candidate, latched_alpha, out.flops);
  out.inverse = std::move(inv.inverse);
  out.precond_alpha = inv.alpha;
  return out;
}

GramState reduce_gram(const GramState& state, const IndexSet& keep) {
  std::unordered_map<Index, Index> position;
  for (Index i = 0; i < state.size(); ++i) position.emplace(state.active[i], i);

  std::vector<bool> kept(state.active.size(), false);
  for (Index j : keep) {
    auto it = position.find(j);
    if (it == position.end()) throw Error("reduce_gram: keep set is not a subset of the active set");
    kept[it->second] = true;
  }

  std::vector<Index> e_pos;
  std::vector<Index> c_pos;
  for (Index i = 0; i < state.size(); ++i) (kept[i] ? e_pos : c_pos).push_back(i);
  if (c_pos.empty()) return state;

  const Index ne = static_cast<Index>(e_pos.size());
  const Index nc = static_cast<Index>(c_pos.size());

  GramState out;
  out.precond_alpha = state.precond_alpha;
  out.flops = state.flops;
  out.active.reserve(e_pos.size());
  for (Index i : e_pos) out.active.push_back(state.active[i]);

  out.hessian = state.hessian(e_pos, e_pos);
  const Matrix q_ee = state.inverse(e_pos, e_pos);
  const Matrix q_ec = state.inverse(e_pos, c_pos);
  const Matrix q_cc = state.inverse(c_pos, c_pos);

  Eigen::LLT<Matrix> llt(q_cc);
  if (llt.info() != Eigen::Success) {
    throw SingularError("reduce_gram: dropped block of the inverse is singular");
  }
  out.inverse = q_ee - q_ec * llt.solve(q_ec.transpose());
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose()).eval();
  out.flops += cube(nc) + prod(nc, nc, ne) + prod(nc, ne, ne);
  return out;
}

GramState augment_gram(const GramState& state, const IndexSet& add, const Design& x,
                       const Vector* weights, double alpha_candidate) {
  if (add.empty()) return state;
  for (Index j : add) {
    if (std::find(state.active.begin(), state.active.end(), j) != state.active.end()) {
      throw Error("augment_gram: added predictor already active");
    }
  }

  const Index n = x.rows();
  const Index ne = state.size();
  const Index nd = static_cast<Index>(add.size());

  GramState out;
  out.flops = state.flops;
  out.active = state.active;
  out.active.insert(out.active.end(), add.begin(), add.end());

  const Matrix x_d = gather_columns(x, add);
  const Matrix wx_d = weighted(x_d, weights);
  const Matrix h_dd = x_d.transpose() * wx_d;
  out.flops += prod(n, nd, nd);

  Matrix b(ne, nd);
  if (ne > 0) {
    const Matrix x_e = gather_columns(x, state.active);
    b = x_e.transpose() * wx_d;
    out.flops += prod(n, ne, nd);
  }

  out.hessian.resize(ne + nd, ne + nd);
  out.hessian.topLeftCorner(ne, ne) = state.hessian;
  out.hessian.topRightCorner(ne, nd) = b;
  out.hessian.bottomLeftCorner(nd, ne) = b.transpose();
  out.hessian.bottomRightCorner(nd, nd) = h_dd;

  const double alpha = state.precond_alpha;
  const Matrix qb = state.inverse * b;
  Matrix s = shifted(h_dd, alpha) - b.transpose() * qb;
  s = 0.5 * (s + s.transpose()).eval();
  out.flops += prod(ne, ne, nd) + prod(nd, nd, ne) + cube(nd);

  Eigen::LLT<Matrix> llt(s);
  const bool ok = alpha > 0.0 ? llt.info() == Eigen::Success : smallest_pivot(llt) >= alpha_candidate;
  if (!ok) {
    if (alpha > 0.0) throw SingularError("augment_gram: Schur complement singular after preconditioning");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
    out.flops += cube(nd);
    if (eig.eigenvalues().minCoeff() < alpha_candidate) {
      // Latch alpha and rebuild the full inverse for H + alpha I.
      Eigen::SelfAdjointEigenSolver<Matrix> full(out.hessian);
      out.flops += cube(ne + nd);
      out.inverse = spectral_inverse(full, alpha_candidate);
      out.precond_alpha = alpha_candidate;
      return out;
    }
    if (llt.info() != Eigen::Success) {
      throw SingularError("augment_gram: Schur complement is not positive definite");
    }
  }

  const Matrix s_inv = llt.solve(Matrix::Identity(nd, nd));
  const Matrix qb_sinv = qb * s_inv;
  out.inverse.resize(ne + nd, ne + nd);
  out.inverse.topLeftCorner(ne, ne) = state.inverse + qb_sinv * qb.transpose();
  out.inverse.topRightCorner(ne, nd) = -qb_sinv;
  out.inverse.bottomLeftCorner(nd, ne) = -qb_sinv.transpose();
  out.inverse.bottomRightCorner(nd, nd) = s_inv;
  out.precond_alpha = alpha;
  out.flops += prod(ne, nd, nd) + prod(ne, ne, nd);
  return out;
}

GramState update_gram(const GramState& state, const IndexSet& new_active, const Design& x,
                      const Vector* weights, double alpha_candidate) {
  std::vector<bool> in_new(static_cast<std::size_t>(x.cols()), false);
  for (Index j : new_active) in_new[j] = true;
  std::vector<bool> in_old(static_cast<std::size_t>(x.cols()), false);
  for (Index j : state.active) in_old[j] = true;

  IndexSet keep;
  for (Index j : state.active) {
    if (in_new[j]) keep.push_back(j);
  }
  IndexSet add;
  for (Index j : new_active) {
    if (!in_old[j]) add.push_back(j);
  }
  GramState reduced = reduce_gram(state, keep);
  return augment_gram(reduced, add, x, weights, alpha_candidate);
}

double preconditioned_identity_error(const GramState& state) {
  const Index k = state.size();
  if (k == 0) return 0.0;
  const Matrix prod = shifted(state.hessian, state.precond_alpha) * state.inverse;
  return (prod - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
}

}  // namespace hesslasso
