#include "hesslasso/path.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "hesslasso/screening.hpp"

namespace hesslasso {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

using Mask = std::vector<char>;

IndexSet members(const Mask& mask) {
  IndexSet out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) out.push_back(static_cast<Index>(j));
  }
  return out;
}

Index count(const Mask& mask) { return static_cast<Index>(std::count(mask.begin(), mask.end(), 1)); }

void assign(Mask& mask, const IndexSet& set) {
  std::fill(mask.begin(), mask.end(), 0);
  for (Index j : set) mask[j] = 1;
}

bool uses_strong_tier(Strategy s) { return s == Strategy::hessian || s == Strategy::working_plus; }

void validate(const Design& x, const Vector& y, const PathConfig& cfg) {
  if (x.rows() != y.size()) throw Error("fit_path: X and y have different numbers of rows");
  if (x.cols() < 1) throw Error("fit_path: design has no columns");
  if (cfg.path_length < 1) throw Error("fit_path: path length must be at least 1");
  if (cfg.xi && !(*cfg.xi > 0.0 && *cfg.xi < 1.0)) throw Error("fit_path: xi must lie in (0, 1)");
  if (!(cfg.epsilon > 0.0)) throw Error("fit_path: epsilon must be positive");
  if (cfg.gamma < 0.0) throw Error("fit_path: gamma must be nonnegative");
  if (cfg.loss == LossKind::poisson && cfg.strategy == Strategy::gap_safe_only) {
    throw Error("fit_path: gap_safe_only is unavailable for the Poisson loss");
  }
  if (cfg.lambdas) {
    const auto& l = *cfg.lambdas;
    if (l.empty()) throw Error("fit_path: explicit lambda grid is empty");
    for (std::size_t k = 0; k < l.size(); ++k) {
      if (!(l[k] > 0.0)) throw Error("fit_path: lambdas must be positive");
      if (k > 0 && !(l[k] < l[k - 1])) throw Error("fit_path: lambdas must be strictly decreasing");
    }
  }
}

/// Mutable state of one path fit.
class PathFit {
 public:
  PathFit(const Design& x, const Vector& y, const PathConfig& cfg)
      : x_(x),
        y_(y),
        cfg_(cfg),
        kind_(cfg.loss),
        loss_(LossModel::make(cfg.loss, y)),
        n_(x.rows()),
        p_(x.cols()),
        rng_(cfg.seed),
        beta_(Vector::Zero(x.cols())),
        ws_(CdWorkspace::from(x, y, beta_, cfg.loss)),
        corr_(Vector::Zero(x.cols())),
        in_w_(static_cast<std::size_t>(p_), 0),
        in_s_(static_cast<std::size_t>(p_), 0),
        in_g_(static_cast<std::size_t>(p_), 1),
        ever_(static_cast<std::size_t>(p_), 0) {
    tolerance_ = cfg.epsilon * loss_.zeta;
    alpha_candidate_ = default_precond_alpha(n_);
    gap_available_ = loss_.supports_gap_safe;
    gap_safe_ = cfg.gap_safe_augmentation && gap_available_;
    if (kind_ == LossKind::logistic) {
      const double measure = x.density() * static_cast<double>(n_) /
                             static_cast<double>(std::max(n_, p_));
      exact_weights_ = measure < cfg.sparsity_heuristic_threshold;
    } else {
      exact_weights_ = kind_ == LossKind::poisson;
    }
  }

  PathResult run();

 private:
  bool solve_step(double lambda, StepRecord& rec);
  void prepare_next(double lambda, double lambda_next, StepRecord& rec);
  void drop_outside_working();
  const Vector* gram_weights();

  const Design& x_;
  const Vector& y_;
  const PathConfig& cfg_;
  LossKind kind_;
  LossModel loss_;
  Index n_;
  Index p_;
  Rng rng_;
  Vector beta_;
  CdWorkspace ws_;
  Vector corr_;
  Mask in_w_;
  Mask in_s_;
  Mask in_g_;
  Mask ever_;
  GramState gram_;
  Vector weights_;
  double tolerance_ = 0.0;
  double alpha_candidate_ = 0.0;
  bool gap_available_ = true;
  bool gap_safe_ = true;
  bool exact_weights_ = false;
};

const Vector* PathFit::gram_weights() {
  switch (kind_) {
    case LossKind::least_squares:
      return nullptr;
    case LossKind::logistic:
      weights_ = curvature_from_eta(kind_, ws_.eta, !exact_weights_);
      return &weights_;
    case LossKind::poisson:
      weights_ = curvature_from_eta(kind_, ws_.eta);
      return &weights_;
  }
  return nullptr;
}

void PathFit::drop_outside_working() {
  bool changed = false;
  for (Index j = 0; j < p_; ++j) {
    if (!in_w_[j] && beta_[j] != 0.0) {
      beta_[j] = 0.0;
      changed = true;
    }
  }
  if (changed) ws_.refresh(x_, y_, beta_, kind_);
}

bool PathFit::solve_step(double lambda, StepRecord& rec) {
  std::fill(in_g_.begin(), in_g_.end(), 1);
  const bool strong_tier = uses_strong_tier(cfg_.strategy);

  SubproblemSpec spec;
  spec.lambda = lambda;
  spec.tolerance = tolerance_;
  spec.max_passes = cfg_.max_passes;
  spec.line_search = kind_ == LossKind::logistic;

  while (true) {
    ++rec.rounds;
    if (rec.rounds > p_ + 2) return false;

    spec.working = members(in_w_);
    auto t0 = Clock::now();
    const auto sub = solve_subproblem(x_, y_, spec, kind_, beta_, ws_, rng_);
    rec.cd_time += seconds_since(t0);
    rec.passes += sub.passes;
    if (!sub.converged) return false;

    t0 = Clock::now();
    IndexSet violations;
    if (strong_tier) {
      IndexSet candidates;
      for (Index j = 0; j < p_; ++j) {
        if (in_s_[j] && !in_w_[j]) candidates.push_back(j);
      }
      violations = kkt_check(x_, ws_.residual, candidates, lambda, corr_).violations;
    }

    if (violations.empty()) {
      const IndexSet g = members(in_g_);
      x_.dots(g, ws_.residual, corr_);
      double max_abs = 0.0;
      for (Index j : g) max_abs = std::max(max_abs, std::abs(corr_[j]));

      if (gap_available_) {
        const auto gap = gap_from_residual(kind_, y_, ws_.eta, ws_.residual, beta_.lpNorm<1>(),
                                           lambda, max_abs);
        rec.duality_gap = gap.gap;
        if (gap.gap < tolerance_) {
          rec.kkt_time += seconds_since(t0);
          return true;
        }
        if (gap_safe_) {
          const Vector theta_dots = corr_ / gap.scale;
          const IndexSet survivors = gap_safe_screen_from_dots(x_, theta_dots, gap.gap, lambda, g, kind_);
          assign(in_g_, survivors);
        }
      } else {
        rec.duality_gap = sub.gap;
      }

      for (Index j = 0; j < p_; ++j) {
        if (in_g_[j] && !in_s_[j] && !in_w_[j] && std::abs(corr_[j]) >= lambda) {
          violations.push_back(j);
        }
      }
      if (gap_safe_) {
        for (Index j = 0; j < p_; ++j) {
          if (!in_g_[j]) {
            in_w_[j] = 0;
            in_s_[j] = 0;
          }
        }
        drop_outside_working();
      }
      if (violations.empty()) {
        rec.kkt_time += seconds_since(t0);
        // Poisson: no certificate beyond a clean KKT sweep.
        return !gap_available_;
      }
    }
    rec.kkt_time += seconds_since(t0);

    rec.violations += static_cast<int>(violations.size());
    for (Index j : violations) in_w_[j] = 1;
  }
}

void PathFit::prepare_next(double lambda, double lambda_next, StepRecord& rec) {
  const IndexSet active = support(beta_);
  const IndexSet ever = members(ever_);

  auto t0 = Clock::now();
  const IndexSet strong_kept = screen_keep(strong_estimate(corr_, lambda, lambda_next), lambda_next);
  IndexSet strong_or_active;
  std::set_union(strong_kept.begin(), strong_kept.end(), active.begin(), active.end(),
                 std::back_inserter(strong_or_active));

  switch (cfg_.strategy) {
    case Strategy::hessian: {
      rec.screen_time += seconds_since(t0);
      t0 = Clock::now();
      const Vector* w = gram_weights();
      const bool rebuild = exact_weights_ || !cfg_.incremental_gram;
      try {
        gram_ = rebuild ? build_gram(active, x_, w, alpha_candidate_, gram_.precond_alpha)
                        : update_gram(gram_, active, x_, w, alpha_candidate_);
      } catch (const SingularError&) {
        // Start over with preconditioning latched.
        gram_ = build_gram(active, x_, w, alpha_candidate_, alpha_candidate_);
      }
      rec.gram_time += seconds_since(t0);

      t0 = Clock::now();
      Vector signs(gram_.size());
      Vector beta_active(gram_.size());
      for (Index i = 0; i < gram_.size(); ++i) {
        beta_active[i] = beta_[gram_.active[i]];
        signs[i] = sgn(beta_active[i]);
      }
      if (active.empty()) {
        IndexSet w_next;
        std::set_union(strong_kept.begin(), strong_kept.end(), ever.begin(), ever.end(),
                       std::back_inserter(w_next));
        assign(in_w_, w_next);
      } else {
        const auto est = hessian_estimate(corr_, lambda, lambda_next, gram_, x_, signs,
                                          strong_kept, cfg_.gamma, w);
        assign(in_w_, hessian_screen(est, lambda_next, ever));
      }
      assign(in_s_, strong_kept);

      if (cfg_.hessian_warm_start && !active.empty()) {
        const Vector next = warm_start(beta_active, lambda, lambda_next, gram_);
        for (Index i = 0; i < gram_.size(); ++i) {
          const double delta = next[i] - beta_[gram_.active[i]];
          if (delta == 0.0) continue;
          beta_[gram_.active[i]] = next[i];
          x_.axpy(gram_.active[i], delta, ws_.eta);
        }
        ws_.residual = gradient_residual(kind_, y_, ws_.eta);
      }
      rec.screen_time += seconds_since(t0);
      return;
    }
    case Strategy::strong:
      assign(in_w_, strong_or_active);
      std::fill(in_s_.begin(), in_s_.end(), 0);
      break;
    case Strategy::working_plus:
      assign(in_w_, ever);
      assign(in_s_, strong_kept);
      break;
    case Strategy::gap_safe_only: {
      std::fill(in_s_.begin(), in_s_.end(), 0);
      IndexSet all(static_cast<std::size_t>(p_));
      for (Index j = 0; j < p_; ++j) all[j] = j;
      if (!gap_safe_) {
        assign(in_w_, all);
        break;
      }
      // Sequential test at lambda_next from the current solution.
      corr_ = x_.transpose_times(ws_.residual);
      const auto gap = gap_from_residual(kind_, y_, ws_.eta, ws_.residual, beta_.lpNorm<1>(),
                                         lambda_next, corr_.cwiseAbs().maxCoeff());
      const Vector theta_dots = corr_ / gap.scale;
      assign(in_w_, gap_safe_screen_from_dots(x_, theta_dots, gap.gap, lambda_next, all, kind_));
      break;
    }
  }
  drop_outside_working();
  rec.screen_time += seconds_since(t0);
}

PathResult PathFit::run() {
  PathResult result;
  result.loss = kind_;
  result.strategy = cfg_.strategy;
  result.zeta = loss_.zeta;
  result.tolerance = tolerance_;
  result.p = p_;
  result.exact_weighted_gram = cfg_.strategy == Strategy::hessian && kind_ == LossKind::logistic &&
                               exact_weights_;
  result.lambda_max = lambda_max(x_, y_, kind_);

  const double null_dev = null_deviance(kind_, y_);
  if (!(result.lambda_max > 0.0)) {
    StepRecord rec;
    rec.lambda = 0.0;
    result.steps.push_back(rec);
    result.termination = Termination::degenerate;
    return result;
  }

  std::vector<double> grid;
  if (cfg_.lambdas) {
    grid = *cfg_.lambdas;
  } else {
    const double xi = cfg_.xi.value_or(p_ > n_ ? 1e-2 : 1e-4);
    grid = lambda_grid(result.lambda_max, cfg_.path_length, xi);
  }

  double previous_dev = deviance(kind_, y_, ws_.eta);
  const std::size_t m = grid.size();
  for (std::size_t k = 0; k < m; ++k) {
    const auto step_start = Clock::now();
    const double lambda = grid[k];
    StepRecord rec;
    rec.lambda = lambda;
    rec.screened_size = count(in_w_);
    rec.strong_size = count(in_s_);
    rec.precond_alpha = gram_.precond_alpha;

    const bool ok = solve_step(lambda, rec);

    const IndexSet active = support(beta_);
    for (Index j : active) ever_[j] = 1;
    rec.support = active;
    rec.values.reserve(active.size());
    for (Index j : active) rec.values.push_back(beta_[j]);
    rec.active_size = static_cast<Index>(active.size());
    rec.ever_active_size = count(ever_);
    rec.working_size = count(in_w_);
    rec.working = members(in_w_);
    rec.gap_safe_size = count(in_g_);

    const double dev = deviance(kind_, y_, ws_.eta);
    rec.deviance_ratio = null_dev > 0.0 ? 1.0 - dev / null_dev : 1.0;

    if (!ok) {
      rec.wall_time = seconds_since(step_start);
      result.steps.push_back(std::move(rec));
      result.termination = Termination::stalled;
      break;
    }

    std::optional<Termination> stop;
    if (cfg_.deviance_stopping) {
      if (rec.deviance_ratio >= cfg_.dev_ratio_stop) {
        stop = Termination::dev_ratio;
      } else if (static_cast<int>(k) >= cfg_.dev_change_min_steps && previous_dev > 0.0 &&
                 (previous_dev - dev) / previous_dev < cfg_.dev_change_stop) {
        stop = Termination::dev_change;
      }
    }
    if (!stop && rec.ever_active_size > p_) stop = Termination::ever_active_exceeds_p;
    previous_dev = dev;

    if (!stop && k + 1 < m) prepare_next(lambda, grid[k + 1], rec);

    rec.wall_time = seconds_since(step_start);
    result.steps.push_back(std::move(rec));
    if (stop) {
      result.termination = *stop;
      break;
    }
  }
  return result;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::hessian: return "hessian";
    case Strategy::strong: return "strong";
    case Strategy::working_plus: return "working_plus";
    case Strategy::gap_safe_only: return "gap_safe_only";
  }
  return "unknown";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "hessian") return Strategy::hessian;
  if (name == "strong") return Strategy::strong;
  if (name == "working_plus" || name == "working+" || name == "working") return Strategy::working_plus;
  if (name == "gap_safe_only" || name == "gap_safe") return Strategy::gap_safe_only;
  throw Error("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::dev_ratio: return "dev_ratio";
    case Termination::dev_change: return "dev_change";
    case Termination::ever_active_exceeds_p: return "ever_active_exceeds_p";
    case Termination::stalled: return "stalled";
    case Termination::degenerate: return "degenerate";
  }
  return "unknown";
}

Vector PathResult::coefficients(std::size_t step) const {
  Vector beta = Vector::Zero(p);
  const auto& rec = steps.at(step);
  for (std::size_t i = 0; i < rec.support.size(); ++i) beta[rec.support[i]] = rec.values[i];
  return beta;
}

int PathResult::total_passes() const {
  int s = 0;
  for (const auto& r : steps) s += r.passes;
  return s;
}

int PathResult::total_violations() const {
  int s = 0;
  for (const auto& r : steps) s += r.violations;
  return s;
}

double PathResult::total_time() const {
  double s = 0.0;
  for (const auto& r : steps) s += r.wall_time;
  return s;
}

std::vector<double> lambda_grid(double lambda_max, int m, double xi) {
  if (!(lambda_max > 0.0)) return {0.0};
  if (m < 1) throw Error("lambda_grid: path length must be at least 1");
  if (m == 1) return {lambda_max};
  std::vector<double> grid(static_cast<std::size_t>(m));
  const double log_max = std::log(lambda_max);
  const double log_step = std::log(xi) / static_cast<double>(m - 1);
  for (int k = 0; k < m; ++k) grid[k] = std::exp(log_max + k * log_step);
  grid.front() = lambda_max;
  grid.back() = xi * lambda_max;
  return grid;
}

Vector warm_start(const Vector& beta_active, double lambda_k, double lambda_next,
                  const GramState& gram) {
  if (beta_active.size() != gram.size()) throw Error("warm_start: coefficient/Gram size mismatch");
  if (lambda_next == lambda_k || gram.size() == 0) return beta_active;
  const Vector signs = beta_active.unaryExpr([](double v) { return sgn(v); });
  return beta_active + (lambda_k - lambda_next) * (gram.inverse * signs);
}

PathResult fit_path(const Design& x, const Vector& y, const PathConfig& config) {
  validate(x, y, config);
  PathFit fit(x, y, config);
  return fit.run();
}

}  // namespace hesslasso
