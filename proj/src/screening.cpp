#include "hesslasso/screening.hpp"

#include <algorithm>
#include <cmath>

namespace hesslasso {

namespace {

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

}  // namespace

Vector strong_estimate(const Vector& c, double lambda_k, double lambda_next) {
  const double step = lambda_k - lambda_next;
  return c + step * c.unaryExpr([](double v) { return sgn(v); });
}

IndexSet screen_keep(const Vector& estimate, double lambda) {
  IndexSet out;
  for (Index j = 0; j < estimate.size(); ++j) {
    if (std::abs(estimate[j]) >= lambda) out.push_back(j);
  }
  return out;
}

HessianEstimate hessian_estimate(const Vector& c_k, double lambda_k, double lambda_next,
                                 const GramState& gram, const Design& x, const Vector& sign_beta,
                                 const IndexSet& strong_kept, double gamma,
                                 const Vector* weights) {
  const Index p = c_k.size();
  const double step = lambda_next - lambda_k;

  HessianEstimate est;
  est.gamma = gamma;
  est.c_hat = Vector::Zero(p);
  est.c_tilde = Vector::Zero(p);

  if (gram.active.empty()) {
    est.c_hat = strong_estimate(c_k, lambda_k, lambda_next);
    est.c_tilde = est.c_hat;
  } else {
    // v = D(w) X_A H^{-1} sign(beta_A)
    const Vector coef = gram.inverse * sign_beta;
    Vector v = Vector::Zero(x.rows());
    for (Index i = 0; i < gram.size(); ++i) x.axpy(gram.active[i], coef[i], v);
    if (weights != nullptr) v = v.cwiseProduct(*weights);

    std::vector<bool> is_active(static_cast<std::size_t>(p), false);
    for (Index i = 0; i < gram.size(); ++i) {
      const Index j = gram.active[i];
      is_active[j] = true;
      est.c_hat[j] = c_k[j] + step * x.dot(j, v);
      est.c_tilde[j] = lambda_next * sign_beta[i];
    }
    for (Index j : strong_kept) {
      if (is_active[j]) continue;
      est.c_hat[j] = c_k[j] + step * x.dot(j, v);
      est.c_tilde[j] = est.c_hat[j];
    }
  }

  // Inflate by a fraction of the unit bound, away from zero along sign(c_k).
  const double inflation = gamma * (lambda_k - lambda_next);
  est.c_check = est.c_tilde + inflation * c_k.unaryExpr([](double v) { return sgn(v); });
  return est;
}

IndexSet hessian_screen(const HessianEstimate& est, double lambda_next, const IndexSet& ever_active) {
  IndexSet kept = screen_keep(est.c_check, lambda_next);
  IndexSet out;
  out.reserve(kept.size() + ever_active.size());
  std::set_union(kept.begin(), kept.end(), ever_active.begin(), ever_active.end(),
                 std::back_inserter(out));
  return out;
}

IndexSet gap_safe_screen_from_dots(const Design& x, const Vector& theta_dots, double gap,
                                   double lambda, const IndexSet& candidates, LossKind kind) {
  const double radius = std::sqrt(2.0 * std::max(gap, 0.0) * gradient_lipschitz(kind)) / lambda;
  IndexSet out;
  out.reserve(candidates.size());
  for (Index j : candidates) {
    // Margin for rounding in x_j^T theta; without it a zero gap drops active predictors.
    const double bound = 1.0 - std::sqrt(x.squared_norm(j)) * radius - 1e-10;
    if (std::abs(theta_dots[j]) >= bound) out.push_back(j);
  }
  return out;
}

IndexSet gap_safe_screen(const Design& x, const Vector& theta, double gap, double lambda,
                         const IndexSet& candidates, LossKind kind) {
  Vector dots = Vector::Zero(x.cols());
  x.dots(candidates, theta, dots);
  return gap_safe_screen_from_dots(x, dots, gap, lambda, candidates, kind);
}

KktResult kkt_check(const Design& x, const Vector& residual, const IndexSet& candidates,
                    double lambda, Vector& correlation_cache) {
  KktResult out;
  x.dots(candidates, residual, correlation_cache);
  for (Index j : candidates) {
    if (std::abs(correlation_cache[j]) >= lambda) out.violations.push_back(j);
  }
  return out;
}

}  // namespace hesslasso
