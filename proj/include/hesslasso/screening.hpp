#pragma once

#include "hesslasso/design.hpp"
#include "hesslasso/gram.hpp"
#include "hesslasso/losses.hpp"

namespace hesslasso {

/**
 * Index sets tracked during a path fit. Every screening rule below is phrased
 * as "keep predictor j iff the magnitude of an estimate of c(lambda)_j reaches
 * lambda"; ties are kept.
 */
struct ScreenSets {
  IndexSet active;
  IndexSet strong;
  IndexSet working;
  IndexSet gap_safe;
  IndexSet violations;
};

/// c(lambda_k) + (lambda_k - lambda_next) sign(c(lambda_k)).
Vector strong_estimate(const Vector& c, double lambda_k, double lambda_next);

/// {j : |estimate_j| >= lambda}
IndexSet screen_keep(const Vector& estimate, double lambda);

struct HessianEstimate {
  /// Second-order estimate; filled for active predictors and for the strong
  /// set outside the active set, zero elsewhere.
  Vector c_hat;
  Vector c_tilde;
  Vector c_check;
  double gamma = 0.01;
};

/**
 * Hessian correlation estimate for lambda_next from the fit at lambda_k.
 *
 * `gram` must cover exactly the active set, in its own order; `sign_beta[i]` is
 * the sign of the coefficient of gram.active[i]. `weights` are the curvature
 * weights the Gram matrix was built with (null for unit weights). The product
 * D(w) X_A H^{-1} sign is formed once and then dotted only with predictors in
 * `strong_kept` outside the active set. With an empty active set the estimate
 * degenerates to the strong estimate.
 */
HessianEstimate hessian_estimate(const Vector& c_k, double lambda_k, double lambda_next,
                                 const GramState& gram, const Design& x, const Vector& sign_beta,
                                 const IndexSet& strong_kept, double gamma,
                                 const Vector* weights = nullptr);

/// {j : |c_check_j| >= lambda_next} ∪ ever_active, sorted.
IndexSet hessian_screen(const HessianEstimate& est, double lambda_next, const IndexSet& ever_active);

/**
 * Gap Safe sphere test. Discards j ∈ candidates when
 * |x_j^T theta| < 1 - ||x_j|| sqrt(2 G L) / lambda, where L is the Lipschitz
 * constant of the loss gradient (1 for least squares), less a 1e-10 rounding
 * margin. Returns the survivors.
 */
IndexSet gap_safe_screen(const Design& x, const Vector& theta, double gap, double lambda,
                         const IndexSet& candidates, LossKind kind = LossKind::least_squares);

/// Same test with precomputed x_j^T theta values (indexed by predictor).
IndexSet gap_safe_screen_from_dots(const Design& x, const Vector& theta_dots, double gap,
                                   double lambda, const IndexSet& candidates,
                                   LossKind kind = LossKind::least_squares);

struct KktResult {
  IndexSet violations;
};

/// {j ∈ candidates : |x_j^T residual| >= lambda}. The computed correlations are
/// written into `correlation_cache` (length p) for reuse.
KktResult kkt_check(const Design& x, const Vector& residual, const IndexSet& candidates,
                    double lambda, Vector& correlation_cache);

}  // namespace hesslasso
