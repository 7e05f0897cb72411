#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hesslasso/data.hpp"
#include "hesslasso/path.hpp"

namespace hesslasso {

enum class Experiment {
  timings,
  efficiency,
  violations,
  warmstarts,
  gamma_sweep,
  tolerance_sweep,
  path_length,
  ablation,
  breakdown,
};

std::string_view to_string(Experiment e);
Experiment parse_experiment(std::string_view name);

struct ExperimentSpec {
  Experiment experiment = Experiment::timings;
  int repetitions = 1;
  /// n, p, s, snr and the loss; rho comes from `rhos` and the seed from `seed`.
  SimSpec sim;
  /// Sweep lists; empty lists are filled by with_defaults.
  std::vector<double> rhos;
  std::optional<std::string> data_path;
  bool drop_duplicates = false;
  std::vector<Strategy> strategies;
  std::vector<double> gammas;
  std::vector<double> epsilons;
  std::vector<int> path_lengths;
  std::optional<double> xi;
  std::uint64_t seed = 1;
  /// 0 means one worker per logical core; HESSLASSO_THREADS overrides.
  int workers = 0;
  /// Directory for results.csv and steps.csv; empty writes nothing.
  std::string out_dir;
};

/// Fill in experiment-specific defaults (strategies, sweeps) left empty.
ExperimentSpec with_defaults(ExperimentSpec spec);
void validate(const ExperimentSpec& spec);

struct BenchRow {
  std::string strategy;
  double rho = 0.0;
  Index n = 0;
  Index p = 0;
  std::string loss;
  std::uint64_t seed = 0;
  double total_time_s = 0.0;
  double cd_time_s = 0.0;
  double kkt_time_s = 0.0;
  double gram_time_s = 0.0;
  double mean_screened = 0.0;
  double mean_active = 0.0;
  long long total_violations = 0;
  long long total_passes = 0;
  long long steps = 0;
  std::string termination_reason;
  double gamma = 0.0;
  double eps = 0.0;
  int path_length = 0;
  std::string variant;
  long long row_id = 0;
  int stalled = 0;
  std::string coef_hash;
  double screen_time_s = 0.0;
  double lambda_max = 0.0;
};

struct StepRow {
  long long row_id = 0;
  int step = 0;
  StepRecord record;
};

struct ExperimentResult {
  std::vector<BenchRow> rows;
  std::vector<StepRow> steps;
};

/// One benchmark cell before it is run.
struct Task {
  long long row_id = 0;
  double rho = 0.0;
  double gamma = 0.0;
  double eps = 0.0;
  int path_length = 0;
  std::string variant;
  int repetition = 0;
  std::uint64_t seed = 0;
  Strategy strategy = Strategy::hessian;
};

/// All rows of an experiment in output order (condition, seed, strategy).
std::vector<Task> enumerate_tasks(const ExperimentSpec& spec);

/// Path configuration used for a task.
PathConfig task_config(const ExperimentSpec& spec, const Task& task);

/// Run every task (or only `only_row`) and write CSVs when out_dir is set.
ExperimentResult run_experiment(const ExperimentSpec& spec,
                                std::optional<long long> only_row = std::nullopt);

/// FNV-1a over every step's lambda, support and coefficient bits.
std::string coefficient_hash(const PathResult& path);

const std::vector<std::string>& result_columns();
const std::vector<std::string>& step_columns();
bool is_time_column(const std::string& name);

void write_results(std::ostream& out, const std::vector<BenchRow>& rows);
void write_steps(std::ostream& out, const std::vector<StepRow>& steps);
std::vector<BenchRow> read_results(std::istream& in);

/// Generic header-keyed CSV table.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);

/// Row-by-row comparison ignoring time columns; returns a description of the
/// first difference or nullopt when equal.
std::optional<std::string> compare_ignoring_times(const CsvTable& a, const CsvTable& b);

struct SummaryRow {
  std::string strategy;
  std::string variant;
  std::string loss;
  double rho = 0.0;
  Index n = 0;
  Index p = 0;
  double gamma = 0.0;
  double eps = 0.0;
  int path_length = 0;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  /// Mean over the smallest mean within the condition; time metrics only.
  std::optional<double> relative;
};

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows);
void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows);

}  // namespace hesslasso
