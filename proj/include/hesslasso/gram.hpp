#pragma once

#include <cstdint>

#include "hesslasso/design.hpp"

namespace hesslasso {

/**
 * Gram matrix H = X_A^T D(w) X_A of the active predictors together with
 * (H + alpha I)^{-1}.
 *
 * `active` is kept in append order: entry i of the matrices belongs to
 * predictor active[i]. Once a nonzero `precond_alpha` has been applied it stays
 * latched for the lifetime of the state.
 */
struct GramState {
  IndexSet active;
  Matrix hessian;
  Matrix inverse;
  double precond_alpha = 0.0;

  /// Scalar multiply-adds spent on this state so far (cost instrumentation).
  std::uint64_t flops = 0;

  Index size() const { return static_cast<Index>(active.size()); }
};

struct PreconditionResult {
  Matrix inverse;
  double alpha = 0.0;
};

/// Default preconditioning shift for n observations.
inline double default_precond_alpha(Index n) { return static_cast<double>(n) * 1e-4; }

/**
 * Spectral preconditioning of a symmetric matrix. When the smallest eigenvalue
 * is below `alpha` the returned inverse is V (Lambda + alpha I)^{-1} V^T and the
 * applied alpha is reported; otherwise the exact inverse with alpha = 0.
 */
PreconditionResult precondition(const Matrix& hessian, double alpha);

/// From-scratch construction over `active` (in the given order).
/// `weights` may be null for unit weights. A positive `latched_alpha` is always
/// applied; otherwise `alpha_candidate` is applied only if needed.
GramState build_gram(const IndexSet& active, const Design& x, const Vector* weights,
                     double alpha_candidate, double latched_alpha = 0.0);

/// Drop every predictor not in `keep`. Throws SingularError if the dropped
/// block of the inverse cannot be factorized.
GramState reduce_gram(const GramState& state, const IndexSet& keep);

/// Append `add` (disjoint from state.active) via the Schur complement.
GramState augment_gram(const GramState& state, const IndexSet& add, const Design& x,
                       const Vector* weights, double alpha_candidate);

/// Reduce to state.active ∩ new_active, then augment with new_active \ state.active.
GramState update_gram(const GramState& state, const IndexSet& new_active, const Design& x,
                      const Vector* weights, double alpha_candidate);

/// max-abs entry of (H + alpha I) * inverse - I.
double preconditioned_identity_error(const GramState& state);

}  // namespace hesslasso
