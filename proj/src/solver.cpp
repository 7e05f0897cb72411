#include "hesslasso/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hesslasso {

namespace {

constexpr int kRebuildEvery = 50;
constexpr double kArmijo = 1e-4;
constexpr double kMinStep = 1e-10;

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

double l1_over(const Vector& beta, const IndexSet& working) {
  double s = 0.0;
  for (Index j : working) s += std::abs(beta[j]);
  return s;
}

struct SegmentPoint {
  double step = 1.0;
  bool stalled = false;
};

/// Backtracking on beta(t) = old + t (new - old). eta is linear in t, so each
/// trial costs O(n + |W|).
SegmentPoint backtrack(LossKind kind, const Vector& y, double lambda, const IndexSet& coords,
                       const Vector& beta_old, const Vector& beta_new, const Vector& eta_old,
                       const Vector& eta_new, const Vector& residual_old) {
  const double l1_old = l1_over(beta_old, coords);
  const double l1_new = l1_over(beta_new, coords);
  const double p_old = primal_value(kind, y, eta_old, l1_old, lambda);
  const Vector d_eta = eta_new - eta_old;
  const double slope = -residual_old.dot(d_eta) + lambda * (l1_new - l1_old);
  const double descent = std::min(slope, 0.0);
  // Objective differences below this are rounding noise.
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(p_old);

  double t = 1.0;
  while (t >= kMinStep) {
    double l1_t = 0.0;
    for (Index j : coords) l1_t += std::abs(beta_old[j] + t * (beta_new[j] - beta_old[j]));
    const Vector eta_t = eta_old + t * d_eta;
    const double p_t = primal_value(kind, y, eta_t, l1_t, lambda);
    if (p_t <= p_old + kArmijo * t * descent + slack) return {t, false};
    t *= 0.5;
  }
  return {0.0, true};
}

}  // namespace

CdWorkspace CdWorkspace::from(const Design& x, const Vector& y, const Vector& beta, LossKind kind) {
  CdWorkspace ws;
  ws.refresh(x, y, beta, kind);
  return ws;
}

void CdWorkspace::refresh(const Design& x, const Vector& y, const Vector& beta, LossKind kind) {
  eta = x.times(beta);
  residual = gradient_residual(kind, y, eta);
}

void cd_epoch(const Design& x, const Vector& y, const IndexSet& working, double lambda,
              LossKind kind, Vector& beta, CdWorkspace& ws, Rng& rng) {
  IndexSet order = working;
  std::shuffle(order.begin(), order.end(), rng);

  if (kind == LossKind::least_squares) {
    for (Index j : order) {
      const double curvature = x.squared_norm(j);
      if (!(curvature > 0.0)) continue;
      const double old = beta[j];
      const double updated =
          soft_threshold(x.dot(j, ws.residual) + curvature * old, lambda) / curvature;
      const double delta = updated - old;
      if (delta != 0.0) {
        x.axpy(j, -delta, ws.residual);
        beta[j] = updated;
      }
    }
    ws.eta = y - ws.residual;
    return;
  }

  Vector weights = curvature_from_eta(kind, ws.eta);
  for (Index j : order) {
    const double curvature = x.weighted_squared_norm(j, weights);
    if (!(curvature > 0.0)) continue;
    const double old = beta[j];
    const double updated =
        soft_threshold(x.dot(j, ws.residual) + curvature * old, lambda) / curvature;
    const double delta = updated - old;
    if (delta == 0.0) continue;
    x.axpy(j, delta, ws.eta);
    beta[j] = updated;
    ws.residual = gradient_residual(kind, y, ws.eta);
    weights = curvature_from_eta(kind, ws.eta);
  }
}

LineSearchResult line_search(const Design& x, const Vector& y, const Vector& beta_old,
                             const Vector& beta_proposed, double lambda, LossKind kind) {
  IndexSet coords;
  for (Index j = 0; j < beta_old.size(); ++j) {
    if (beta_old[j] != 0.0 || beta_proposed[j] != 0.0) coords.push_back(j);
  }
  const Vector eta_old = x.times(beta_old);
  const Vector eta_new = x.times(beta_proposed);
  const Vector r_old = gradient_residual(kind, y, eta_old);
  const auto seg = backtrack(kind, y, lambda, coords, beta_old, beta_proposed, eta_old, eta_new, r_old);
  LineSearchResult out;
  out.stalled = seg.stalled;
  out.step = seg.step;
  out.beta = seg.stalled ? beta_old : Vector(beta_old + seg.step * (beta_proposed - beta_old));
  return out;
}

GapResult subproblem_gap(const Design& x, const Vector& y, const IndexSet& working, double lambda,
                         LossKind kind, const Vector& beta, const CdWorkspace& ws) {
  double max_abs = 0.0;
  for (Index j : working) max_abs = std::max(max_abs, std::abs(x.dot(j, ws.residual)));
  return gap_from_residual(kind, y, ws.eta, ws.residual, l1_over(beta, working), lambda, max_abs);
}

SubproblemResult solve_subproblem(const Design& x, const Vector& y, const SubproblemSpec& spec,
                                  LossKind kind, Vector& beta, CdWorkspace& ws, Rng& rng) {
  SubproblemResult out;
  const bool use_gap = kind != LossKind::poisson;
  const bool use_line_search = spec.line_search && kind == LossKind::logistic;

  if (spec.working.empty()) {
    out.gap = use_gap ? subproblem_gap(x, y, spec.working, spec.lambda, kind, beta, ws).gap : 0.0;
    out.converged = out.gap < spec.tolerance || !use_gap;
    return out;
  }

  double primal_prev =
      use_gap ? 0.0 : primal_value(kind, y, ws.eta, l1_over(beta, spec.working), spec.lambda);

  Vector beta_saved;
  Vector eta_saved;
  Vector residual_saved;

  while (out.passes < spec.max_passes) {
    if (use_line_search) {
      beta_saved = beta;
      eta_saved = ws.eta;
      residual_saved = ws.residual;
    }

    cd_epoch(x, y, spec.working, spec.lambda, kind, beta, ws, rng);
    ++out.passes;

    if (use_line_search) {
      const auto seg = backtrack(kind, y, spec.lambda, spec.working, beta_saved, beta, eta_saved,
                                 ws.eta, residual_saved);
      if (seg.stalled) {
        beta = beta_saved;
        ws.eta = eta_saved;
        ws.residual = residual_saved;
        out.line_search_stalled = true;
      } else if (seg.step < 1.0) {
        for (Index j : spec.working) beta[j] = beta_saved[j] + seg.step * (beta[j] - beta_saved[j]);
        ws.eta = eta_saved + seg.step * (ws.eta - eta_saved);
        ws.residual = gradient_residual(kind, y, ws.eta);
      }
    }

    if (out.passes % kRebuildEvery == 0) ws.refresh(x, y, beta, kind);

    if (use_gap) {
      out.gap = subproblem_gap(x, y, spec.working, spec.lambda, kind, beta, ws).gap;
      if (out.gap < spec.tolerance) {
        out.converged = true;
        break;
      }
    } else {
      const double primal = primal_value(kind, y, ws.eta, l1_over(beta, spec.working), spec.lambda);
      out.gap = std::abs(primal_prev - primal);
      primal_prev = primal;
      if (out.gap < spec.tolerance) {
        out.converged = true;
        break;
      }
    }
    if (out.line_search_stalled) break;
  }
  return out;
}

}  // namespace hesslasso
