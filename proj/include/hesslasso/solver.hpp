#pragma once

#include <random>

#include "hesslasso/design.hpp"
#include "hesslasso/losses.hpp"

namespace hesslasso {

using Rng = std::mt19937_64;

inline constexpr int kDefaultMaxPasses = 100000;

struct SubproblemSpec {
  IndexSet working;
  double lambda = 0.0;
  /// Absolute tolerance, epsilon * zeta.
  double tolerance = 1e-4;
  int max_passes = kDefaultMaxPasses;
  /// Backtracking along each epoch's displacement (logistic only).
  bool line_search = false;
};

struct SubproblemResult {
  int passes = 0;
  /// Duality gap of the subproblem restricted to the working set. For Poisson
  /// this holds the absolute primal change over the last epoch instead.
  double gap = 0.0;
  bool converged = false;
  bool line_search_stalled = false;
};

/// Linear predictor and gradient residual kept consistent with the coefficients.
struct CdWorkspace {
  Vector eta;       ///< X beta
  Vector residual;  ///< y - mu(eta)

  static CdWorkspace from(const Design& x, const Vector& y, const Vector& beta, LossKind kind);
  void refresh(const Design& x, const Vector& y, const Vector& beta, LossKind kind);
};

/// One shuffled sweep over `working`. Least squares uses exact coordinate
/// minimization; the other losses take a proximal Newton step per coordinate
/// with curvature from the current fit. Zero-curvature coordinates are skipped.
void cd_epoch(const Design& x, const Vector& y, const IndexSet& working, double lambda,
              LossKind kind, Vector& beta, CdWorkspace& ws, Rng& rng);

struct LineSearchResult {
  Vector beta;
  double step = 1.0;
  bool stalled = false;
};

/// Armijo backtracking (factor 1e-4, halving) along [beta_old, beta_proposed].
LineSearchResult line_search(const Design& x, const Vector& y, const Vector& beta_old,
                             const Vector& beta_proposed, double lambda, LossKind kind);

/// Coordinate descent on the problem restricted to spec.working, starting from
/// `beta` (coefficients outside the working set must be zero). `ws` must match
/// `beta` on entry and is kept consistent on exit.
SubproblemResult solve_subproblem(const Design& x, const Vector& y, const SubproblemSpec& spec,
                                  LossKind kind, Vector& beta, CdWorkspace& ws, Rng& rng);

/// Duality gap of the subproblem (X_W, y) at the current workspace.
GapResult subproblem_gap(const Design& x, const Vector& y, const IndexSet& working, double lambda,
                         LossKind kind, const Vector& beta, const CdWorkspace& ws);

}  // namespace hesslasso
