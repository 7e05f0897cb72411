#include "hesslasso/losses.hpp"

#include <algorithm>
#include <cmath>

namespace hesslasso {

namespace {

double log1pexp(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double xlogx(double u) { return u > 0.0 ? u * std::log(u) : 0.0; }

/// y log(y / mu) with the 0 log 0 = 0 convention.
double ylog_ratio(double y, double mu) { return y > 0.0 ? y * std::log(y / mu) : 0.0; }

}  // namespace

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::least_squares: return "least_squares";
    case LossKind::logistic: return "logistic";
    case LossKind::poisson: return "poisson";
  }
  return "unknown";
}

LossKind parse_loss(std::string_view name) {
  if (name == "least_squares" || name == "gaussian" || name == "ls") return LossKind::least_squares;
  if (name == "logistic" || name == "binomial") return LossKind::logistic;
  if (name == "poisson") return LossKind::poisson;
  throw Error("unknown loss '" + std::string(name) + "'");
}

LossModel LossModel::make(LossKind kind, const Vector& y) {
  LossModel m;
  m.kind = kind;
  const double n = static_cast<double>(y.size());
  switch (kind) {
    case LossKind::least_squares:
      m.zeta = y.squaredNorm();
      break;
    case LossKind::logistic:
      m.zeta = n * std::log(2.0);
      break;
    case LossKind::poisson: {
      double s = n;
      for (Index i = 0; i < y.size(); ++i) s += std::lgamma(y[i] + 1.0);
      m.zeta = s;
      break;
    }
  }
  // Guard against y = 0 in least squares; any positive normalizer works there.
  if (!(m.zeta > 0.0)) m.zeta = 1.0;
  m.supports_gap_safe = kind != LossKind::poisson;
  return m;
}

double loss_value(LossKind kind, const Vector& y, const Vector& eta) {
  double s = 0.0;
  switch (kind) {
    case LossKind::least_squares:
      return 0.5 * (y - eta).squaredNorm();
    case LossKind::logistic:
      for (Index i = 0; i < y.size(); ++i) s += log1pexp(eta[i]) - y[i] * eta[i];
      return s;
    case LossKind::poisson:
      for (Index i = 0; i < y.size(); ++i) s += std::exp(eta[i]) - y[i] * eta[i] + std::lgamma(y[i] + 1.0);
      return s;
  }
  return s;
}

Vector mean_response(LossKind kind, const Vector& eta) {
  switch (kind) {
    case LossKind::least_squares: return eta;
    case LossKind::logistic: return eta.unaryExpr([](double z) { return sigmoid(z); });
    case LossKind::poisson: return eta.array().exp().matrix();
  }
  return eta;
}

Vector gradient_residual(LossKind kind, const Vector& y, const Vector& eta) {
  return y - mean_response(kind, eta);
}

Vector correlation(const Design& x, const Vector& y, const Vector& beta, LossKind kind) {
  return x.transpose_times(gradient_residual(kind, y, x.times(beta)));
}

double lambda_max(const Design& x, const Vector& y, LossKind kind) {
  if (x.cols() == 0) throw Error("lambda_max: design has no columns");
  const Vector c = x.transpose_times(gradient_residual(kind, y, Vector::Zero(x.rows())));
  return c.cwiseAbs().maxCoeff();
}

double primal_value(LossKind kind, const Vector& y, const Vector& eta, double l1_norm,
                    double lambda) {
  return loss_value(kind, y, eta) + lambda * l1_norm;
}

double dual_value(LossKind kind, const Vector& y, const Vector& theta, double lambda) {
  switch (kind) {
    case LossKind::least_squares:
      return 0.5 * y.squaredNorm() - 0.5 * lambda * lambda * (theta - y / lambda).squaredNorm();
    case LossKind::logistic: {
      double s = 0.0;
      for (Index i = 0; i < y.size(); ++i) {
        const double u = std::clamp(y[i] - lambda * theta[i], 0.0, 1.0);
        s -= xlogx(u) + xlogx(1.0 - u);
      }
      return s;
    }
    case LossKind::poisson:
      break;
  }
  throw Error("duality gap is not available for the Poisson loss");
}

double gradient_lipschitz(LossKind kind) {
  switch (kind) {
    case LossKind::least_squares: return 1.0;
    case LossKind::logistic: return 0.25;
    case LossKind::poisson: break;
  }
  throw Error("Poisson loss has no Lipschitz gradient");
}

GapResult gap_from_residual(LossKind kind, const Vector& y, const Vector& eta,
                            const Vector& residual, double l1_norm, double lambda,
                            double max_abs_correlation) {
  GapResult out;
  out.scale = std::max(lambda, max_abs_correlation);
  out.theta = residual / out.scale;
  out.primal = primal_value(kind, y, eta, l1_norm, lambda);
  out.dual = dual_value(kind, y, out.theta, lambda);
  out.gap = std::max(0.0, out.primal - out.dual);
  return out;
}

GapResult duality_gap(const Design& x, const Vector& y, const Vector& beta, double lambda,
                      LossKind kind) {
  if (!(lambda > 0.0)) throw Error("duality_gap: lambda must be positive");
  const Vector eta = x.times(beta);
  const Vector r = gradient_residual(kind, y, eta);
  const Vector c = x.transpose_times(r);
  return gap_from_residual(kind, y, eta, r, beta.lpNorm<1>(), lambda, c.cwiseAbs().maxCoeff());
}

Vector curvature_from_eta(LossKind kind, const Vector& eta, bool bounded) {
  switch (kind) {
    case LossKind::least_squares:
      return Vector::Ones(eta.size());
    case LossKind::logistic:
      if (bounded) return Vector::Constant(eta.size(), 0.25);
      return eta.unaryExpr([](double z) {
        const double s = sigmoid(z);
        return s * (1.0 - s);
      });
    case LossKind::poisson:
      return eta.array().exp().matrix();
  }
  return Vector::Ones(eta.size());
}

QuadraticLocalModel curvature_weights(const Design& x, const Vector& y, const Vector& beta0,
                                      LossKind kind, bool bounded) {
  QuadraticLocalModel q;
  q.center = beta0;
  const Vector eta = x.times(beta0);
  q.weights = curvature_from_eta(kind, eta, bounded);
  const Vector r = gradient_residual(kind, y, eta);
  q.working_response = eta + r.cwiseQuotient(q.weights);
  return q;
}

double deviance(LossKind kind, const Vector& y, const Vector& eta) {
  double s = 0.0;
  switch (kind) {
    case LossKind::least_squares:
      return (y - eta).squaredNorm();
    case LossKind::logistic:
      for (Index i = 0; i < y.size(); ++i) {
        // saturated log-likelihood minus fitted log-likelihood
        s += xlogx(y[i]) + xlogx(1.0 - y[i]) - (y[i] * eta[i] - log1pexp(eta[i]));
      }
      return 2.0 * s;
    case LossKind::poisson:
      for (Index i = 0; i < y.size(); ++i) {
        const double mu = std::exp(eta[i]);
        s += ylog_ratio(y[i], mu) - (y[i] - mu);
      }
      return 2.0 * s;
  }
  return s;
}

double null_deviance(LossKind kind, const Vector& y) {
  if (kind == LossKind::least_squares) {
    const double mean = y.size() > 0 ? y.mean() : 0.0;
    return (y.array() - mean).matrix().squaredNorm();
  }
  return deviance(kind, y, Vector::Zero(y.size()));
}

DevianceStats deviance_stats(const Design& x, const Vector& y, const Vector& beta, LossKind kind) {
  DevianceStats d;
  d.deviance = deviance(kind, y, x.times(beta));
  d.null_deviance = null_deviance(kind, y);
  d.ratio = d.null_deviance > 0.0 ? 1.0 - d.deviance / d.null_deviance : 1.0;
  return d;
}

}  // namespace hesslasso
