#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "hesslasso/design.hpp"
#include "hesslasso/gram.hpp"
#include "hesslasso/losses.hpp"
#include "hesslasso/solver.hpp"

namespace hesslasso {

/// Screening strategy used to pick the working set at each step.
enum class Strategy {
  hessian,       ///< Hessian rule + strong-set KKT tier + Gap Safe fallback
  strong,        ///< working set = strong rule survivors
  working_plus,  ///< ever-active working set + strong-set KKT tier + Gap Safe fallback
  gap_safe_only  ///< sequential Gap Safe screening only
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

enum class Termination {
  completed,
  dev_ratio,
  dev_change,
  ever_active_exceeds_p,
  stalled,
  degenerate,
};

std::string_view to_string(Termination t);

struct PathConfig {
  int path_length = 100;
  /// Grid floor ratio; defaults to 1e-2 when p > n and 1e-4 otherwise.
  std::optional<double> xi;
  double epsilon = 1e-4;
  Strategy strategy = Strategy::hessian;
  double gamma = 0.01;
  bool gap_safe_augmentation = true;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::least_squares;
  double dev_ratio_stop = 0.999;
  double dev_change_stop = 1e-5;
  /// The deviance-change rule is ignored before this many steps.
  int dev_change_min_steps = 5;
  double sparsity_heuristic_threshold = 1e-3;
  int max_passes = kDefaultMaxPasses;

  /// Ablation toggles (Hessian strategy only).
  bool hessian_warm_start = true;
  bool incremental_gram = true;

  /// Disable deviance-based early stopping (fit the whole grid).
  bool deviance_stopping = true;

  /// Explicit decreasing grid; overrides path_length/xi when set.
  std::optional<std::vector<double>> lambdas;
};

struct StepRecord {
  double lambda = 0.0;
  IndexSet support;
  std::vector<double> values;

  /// Certified full-problem duality gap (Poisson: last primal change).
  double duality_gap = 0.0;
  int passes = 0;
  /// Working-set size produced by the screening rule at the start of the step.
  Index screened_size = 0;
  Index strong_size = 0;
  Index gap_safe_size = 0;
  Index working_size = 0;
  /// Final working set of the step.
  IndexSet working;
  Index active_size = 0;
  Index ever_active_size = 0;
  int violations = 0;
  int rounds = 0;
  double deviance_ratio = 0.0;
  double precond_alpha = 0.0;

  double cd_time = 0.0;
  double kkt_time = 0.0;
  double gram_time = 0.0;
  double screen_time = 0.0;
  double wall_time = 0.0;
};

struct PathResult {
  std::vector<StepRecord> steps;
  Termination termination = Termination::completed;
  LossKind loss = LossKind::least_squares;
  Strategy strategy = Strategy::hessian;
  double lambda_max = 0.0;
  double zeta = 1.0;
  double tolerance = 0.0;
  Index p = 0;
  /// Logistic Hessian strategy only: exact weighted Gram rebuilt per step.
  bool exact_weighted_gram = false;

  Vector coefficients(std::size_t step) const;
  int total_passes() const;
  int total_violations() const;
  double total_time() const;
};

/// Log-spaced grid from lambda_max down to xi * lambda_max (m points).
std::vector<double> lambda_grid(double lambda_max, int m, double xi);

/// beta_A + (lambda_k - lambda_next) * inverse * sign(beta_A), with beta_A
/// given in gram.active order.
Vector warm_start(const Vector& beta_active, double lambda_k, double lambda_next,
                  const GramState& gram);

PathResult fit_path(const Design& x, const Vector& y, const PathConfig& config);

}  // namespace hesslasso
