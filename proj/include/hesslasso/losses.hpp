#pragma once

#include <string>
#include <string_view>

#include "hesslasso/design.hpp"

namespace hesslasso {

enum class LossKind { least_squares, logistic, poisson };

std::string_view to_string(LossKind kind);
LossKind parse_loss(std::string_view name);

/**
 * Loss family descriptor.
 *
 * `zeta` normalizes the convergence tolerance: ||y||^2 for least squares,
 * n log 2 for logistic and n + sum log(y_i!) for Poisson.
 */
struct LossModel {
  LossKind kind = LossKind::least_squares;
  double zeta = 1.0;
  bool supports_gap_safe = true;

  static LossModel make(LossKind kind, const Vector& y);
};

/// Smooth part f(beta) = sum_i f_i(eta_i) evaluated at the linear predictor.
double loss_value(LossKind kind, const Vector& y, const Vector& eta);

/// Per-observation mean mu(eta): eta, sigmoid(eta) or exp(eta).
Vector mean_response(LossKind kind, const Vector& eta);

/// y - mu(eta), so that the correlation is X^T times this vector.
Vector gradient_residual(LossKind kind, const Vector& y, const Vector& eta);

/// Negative gradient c = -grad f(beta) = X^T (y - mu(X beta)).
Vector correlation(const Design& x, const Vector& y, const Vector& beta, LossKind kind);

/// ||correlation at beta = 0||_inf; 0 signals a degenerate problem.
double lambda_max(const Design& x, const Vector& y, LossKind kind);

/// Full objective f(beta) + lambda ||beta||_1.
double primal_value(LossKind kind, const Vector& y, const Vector& eta, double l1_norm,
                    double lambda);

/// Dual objective at theta. Throws for Poisson.
double dual_value(LossKind kind, const Vector& y, const Vector& theta, double lambda);

/// Lipschitz constant of f_i' (1 for least squares, 1/4 for logistic).
double gradient_lipschitz(LossKind kind);

struct GapResult {
  double gap = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  /// theta = residual / scale with scale = max(lambda, max_j |x_j^T residual|).
  double scale = 1.0;
  Vector theta;
};

/// Duality gap with the dual point obtained by residual scaling, given the
/// largest absolute correlation over the predictors that define feasibility.
GapResult gap_from_residual(LossKind kind, const Vector& y, const Vector& eta,
                            const Vector& residual, double l1_norm, double lambda,
                            double max_abs_correlation);

/// From-scratch duality gap over all predictors. Throws for Poisson.
GapResult duality_gap(const Design& x, const Vector& y, const Vector& beta, double lambda,
                      LossKind kind);

/// Local quadratic model of the loss around beta0.
struct QuadraticLocalModel {
  Vector weights;           ///< f_i''(x_i^T beta0), or the constant bound
  Vector working_response;  ///< pseudo-response of the weighted least-squares surrogate
  Vector center;
};

/// Curvature weights at the linear predictor; `bounded` selects the constant
/// upper bound where one exists (1/4 for logistic).
Vector curvature_from_eta(LossKind kind, const Vector& eta, bool bounded = false);

QuadraticLocalModel curvature_weights(const Design& x, const Vector& y, const Vector& beta0,
                                      LossKind kind, bool bounded = false);

struct DevianceStats {
  double deviance = 0.0;
  double null_deviance = 0.0;
  double ratio = 0.0;
};

double deviance(LossKind kind, const Vector& y, const Vector& eta);
double null_deviance(LossKind kind, const Vector& y);
DevianceStats deviance_stats(const Design& x, const Vector& y, const Vector& beta, LossKind kind);

}  // namespace hesslasso
