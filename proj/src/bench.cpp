#include "hesslasso/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <thread>

namespace hesslasso {

namespace {

constexpr double kZ95 = 1.959963984540054;

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("csv: bad number '" + s + "'");
  }
  return v;
}

long long parse_int(const std::string& s) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("csv: bad integer '" + s + "'");
  }
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error("csv: bad integer '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
};

std::vector<std::string> variants_for(Experiment e) {
  switch (e) {
    case Experiment::ablation:
      return {"full", "no_warm_start", "no_incremental_gram", "no_gap_safe"};
    case Experiment::warmstarts:
      return {"full", "no_warm_start"};
    default:
      return {"default"};
  }
}

/// Problem instance shared by the tasks of one repetition.
struct Problem {
  StandardizedData data;
};

Problem make_problem(const ExperimentSpec& spec, const std::optional<LibsvmData>& dataset,
                     double rho, std::uint64_t seed) {
  const LossKind kind = spec.sim.response;
  if (dataset) return Problem{standardize(dataset->x, dataset->y, kind)};
  SimSpec sim = spec.sim;
  sim.rho = rho;
  sim.seed = seed;
  SimData raw = simulate(sim);
  return Problem{standardize(raw.x, raw.y, kind)};
}

std::optional<LibsvmData> load_dataset(const ExperimentSpec& spec) {
  if (!spec.data_path) return std::nullopt;
  if (!std::filesystem::exists(*spec.data_path)) {
    throw Error("dataset '" + *spec.data_path + "' does not exist");
  }
  LibsvmData data = load_libsvm(*spec.data_path, spec.sim.response == LossKind::logistic);
  IndexSet dupes;
  for (const auto& pair : duplicate_columns(data.x)) dupes.push_back(pair.second);
  std::sort(dupes.begin(), dupes.end());
  dupes.erase(std::unique(dupes.begin(), dupes.end()), dupes.end());
  if (!dupes.empty()) {
    std::cerr << "bench: " << dupes.size() << " duplicate column(s) in " << *spec.data_path
              << (spec.drop_duplicates ? ", dropped\n" : "\n");
    if (spec.drop_duplicates) data.x = drop_columns(data.x, dupes);
  }
  return data;
}

BenchRow make_row(const ExperimentSpec& spec, const Task& task, const Problem& problem,
                  const PathResult& path) {
  BenchRow row;
  row.strategy = std::string(to_string(task.strategy));
  row.rho = spec.data_path ? std::nan("") : task.rho;
  row.n = problem.data.x.rows();
  row.p = problem.data.x.cols();
  row.loss = std::string(to_string(spec.sim.response));
  row.seed = task.seed;
  row.gamma = task.gamma;
  row.eps = task.eps;
  row.path_length = task.path_length;
  row.variant = task.variant;
  row.row_id = task.row_id;
  row.lambda_max = path.lambda_max;

  double screened = 0.0;
  double active = 0.0;
  for (std::size_t k = 0; k < path.steps.size(); ++k) {
    const auto& rec = path.steps[k];
    row.total_time_s += rec.wall_time;
    row.cd_time_s += rec.cd_time;
    row.kkt_time_s += rec.kkt_time;
    row.gram_time_s += rec.gram_time;
    row.screen_time_s += rec.screen_time;
    if (k > 0) screened += static_cast<double>(rec.screened_size);
    active += static_cast<double>(rec.active_size);
  }
  const std::size_t m = path.steps.size();
  row.mean_screened = m > 1 ? screened / static_cast<double>(m - 1) : 0.0;
  row.mean_active = m > 0 ? active / static_cast<double>(m) : 0.0;
  row.total_violations = path.total_violations();
  row.total_passes = path.total_passes();
  row.steps = static_cast<long long>(m);
  row.termination_reason = std::string(to_string(path.termination));
  row.stalled = path.termination == Termination::stalled ? 1 : 0;
  row.coef_hash = coefficient_hash(path);
  return row;
}

BenchRow failed_row(const ExperimentSpec& spec, const Task& task) {
  BenchRow row;
  row.strategy = std::string(to_string(task.strategy));
  row.rho = spec.data_path ? std::nan("") : task.rho;
  row.n = spec.sim.n;
  row.p = spec.sim.p;
  row.loss = std::string(to_string(spec.sim.response));
  row.seed = task.seed;
  row.gamma = task.gamma;
  row.eps = task.eps;
  row.path_length = task.path_length;
  row.variant = task.variant;
  row.row_id = task.row_id;
  row.termination_reason = "error";
  row.stalled = 1;
  row.coef_hash = "0";
  return row;
}

int resolve_workers(int requested) {
  if (const char* env = std::getenv("HESSLASSO_THREADS")) {
    try {
      const int v = std::stoi(env);
      if (v > 0) return v;
    } catch (const std::exception&) {
    }
    throw Error("HESSLASSO_THREADS must be a positive integer");
  }
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::timings: return "timings";
    case Experiment::efficiency: return "efficiency";
    case Experiment::violations: return "violations";
    case Experiment::warmstarts: return "warmstarts";
    case Experiment::gamma_sweep: return "gamma_sweep";
    case Experiment::tolerance_sweep: return "tolerance_sweep";
    case Experiment::path_length: return "path_length";
    case Experiment::ablation: return "ablation";
    case Experiment::breakdown: return "breakdown";
  }
  return "unknown";
}

Experiment parse_experiment(std::string_view name) {
  for (Experiment e : {Experiment::timings, Experiment::efficiency, Experiment::violations,
                       Experiment::warmstarts, Experiment::gamma_sweep,
                       Experiment::tolerance_sweep, Experiment::path_length,
                       Experiment::ablation, Experiment::breakdown}) {
    if (to_string(e) == name) return e;
  }
  throw Error("unknown experiment '" + std::string(name) + "'");
}

ExperimentSpec with_defaults(ExperimentSpec spec) {
  const bool poisson = spec.sim.response == LossKind::poisson;
  if (spec.strategies.empty()) {
    switch (spec.experiment) {
      case Experiment::violations:
        spec.strategies = {Strategy::hessian, Strategy::strong, Strategy::working_plus};
        break;
      case Experiment::warmstarts:
      case Experiment::breakdown:
        spec.strategies = {Strategy::hessian, Strategy::working_plus};
        break;
      case Experiment::gamma_sweep:
      case Experiment::ablation:
        spec.strategies = {Strategy::hessian};
        break;
      default:
        spec.strategies = {Strategy::hessian, Strategy::strong, Strategy::working_plus};
        if (!poisson) spec.strategies.push_back(Strategy::gap_safe_only);
        break;
    }
  }
  if (spec.rhos.empty()) spec.rhos = {0.0};
  if (spec.gammas.empty()) {
    spec.gammas = spec.experiment == Experiment::gamma_sweep
                      ? std::vector<double>{0.001, 0.01, 0.1, 0.3}
                      : std::vector<double>{0.01};
  }
  if (spec.epsilons.empty()) {
    spec.epsilons = spec.experiment == Experiment::tolerance_sweep
                        ? std::vector<double>{1e-3, 1e-4, 1e-5, 1e-6}
                        : std::vector<double>{1e-4};
  }
  if (spec.path_lengths.empty()) {
    spec.path_lengths = spec.experiment == Experiment::path_length
                            ? std::vector<int>{20, 50, 100, 200}
                            : std::vector<int>{100};
  }
  return spec;
}

void validate(const ExperimentSpec& spec) {
  if (spec.repetitions < 1) throw Error("repetitions must be at least 1");
  if (spec.strategies.empty()) throw Error("at least one strategy is required");
  if (spec.sim.response == LossKind::poisson) {
    for (Strategy s : spec.strategies) {
      if (s == Strategy::gap_safe_only) throw Error("gap_safe_only is unavailable for poisson");
    }
  }
  if (!spec.data_path) {
    if (spec.sim.n < 2 || spec.sim.p < 1) throw Error("n must be at least 2 and p at least 1");
    if (spec.sim.s < 0 || spec.sim.s > spec.sim.p) throw Error("s must lie in [0, p]");
    for (double r : spec.rhos) {
      if (!(r >= 0.0 && r < 1.0)) throw Error("rho must lie in [0, 1)");
    }
  }
  for (double g : spec.gammas) {
    if (!(g >= 0.0)) throw Error("gamma must be nonnegative");
  }
  for (double e : spec.epsilons) {
    if (!(e > 0.0)) throw Error("eps must be positive");
  }
  for (int m : spec.path_lengths) {
    if (m < 1) throw Error("path length must be at least 1");
  }
  if (spec.xi && !(*spec.xi > 0.0 && *spec.xi < 1.0)) throw Error("xi must lie in (0, 1)");
}

std::vector<Task> enumerate_tasks(const ExperimentSpec& spec) {
  const auto variants = variants_for(spec.experiment);
  const std::vector<double> rhos = spec.data_path ? std::vector<double>{0.0} : spec.rhos;
  std::vector<Task> tasks;
  for (double rho : rhos) {
    for (int m : spec.path_lengths) {
      for (double eps : spec.epsilons) {
        for (double gamma : spec.gammas) {
          for (int r = 0; r < spec.repetitions; ++r) {
            for (Strategy s : spec.strategies) {
              const auto& vs = s == Strategy::hessian ? variants : std::vector<std::string>{"default"};
              for (const auto& v : vs) {
                Task t;
                t.row_id = static_cast<long long>(tasks.size());
                t.rho = rho;
                t.gamma = gamma;
                t.eps = eps;
                t.path_length = m;
                t.variant = v;
                t.repetition = r;
                t.seed = spec.seed + static_cast<std::uint64_t>(r);
                t.strategy = s;
                tasks.push_back(std::move(t));
              }
            }
          }
        }
      }
    }
  }
  return tasks;
}

PathConfig task_config(const ExperimentSpec& spec, const Task& task) {
  PathConfig cfg;
  cfg.path_length = task.path_length;
  cfg.xi = spec.xi;
  cfg.epsilon = task.eps;
  cfg.strategy = task.strategy;
  cfg.gamma = task.gamma;
  cfg.seed = task.seed;
  cfg.loss = spec.sim.response;
  if (task.variant == "no_warm_start") cfg.hessian_warm_start = false;
  if (task.variant == "no_incremental_gram") cfg.incremental_gram = false;
  if (task.variant == "no_gap_safe") cfg.gap_safe_augmentation = false;
  return cfg;
}

ExperimentResult run_experiment(const ExperimentSpec& spec_in, std::optional<long long> only_row) {
  const ExperimentSpec spec = with_defaults(spec_in);
  validate(spec);
  const std::optional<LibsvmData> dataset = load_dataset(spec);

  std::vector<Task> tasks = enumerate_tasks(spec);
  if (only_row) {
    if (*only_row < 0 || *only_row >= static_cast<long long>(tasks.size())) {
      throw Error("row " + std::to_string(*only_row) + " does not exist (" +
                  std::to_string(tasks.size()) + " rows)");
    }
    tasks = {tasks[static_cast<std::size_t>(*only_row)]};
  }

  std::vector<BenchRow> rows(tasks.size());
  std::vector<std::vector<StepRecord>> step_records(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        const Problem problem = make_problem(spec, dataset, task.rho, task.seed);
        const PathResult path = fit_path(problem.data.x, problem.data.y, task_config(spec, task));
        rows[i] = make_row(spec, task, problem, path);
        step_records[i] = path.steps;
      } catch (const Error&) {
        rows[i] = failed_row(spec, task);
      }
    }
  };

  const int workers = std::min<int>(resolve_workers(spec.workers), static_cast<int>(tasks.size()));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult out;
  out.rows = std::move(rows);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (std::size_t k = 0; k < step_records[i].size(); ++k) {
      out.steps.push_back(StepRow{tasks[i].row_id, static_cast<int>(k), step_records[i][k]});
    }
  }

  if (!spec.out_dir.empty() && !only_row) {
    std::filesystem::create_directories(spec.out_dir);
    const auto dir = std::filesystem::path(spec.out_dir);
    std::ofstream results(dir / "results.csv");
    if (!results) throw Error("cannot write to '" + spec.out_dir + "'");
    write_results(results, out.rows);
    std::ofstream steps(dir / "steps.csv");
    write_steps(steps, out.steps);
  }
  return out;
}

std::string coefficient_hash(const PathResult& path) {
  Fnv h;
  for (const auto& rec : path.steps) {
    h.f64(rec.lambda);
    h.u64(rec.support.size());
    for (std::size_t i = 0; i < rec.support.size(); ++i) {
      h.u64(static_cast<std::uint64_t>(rec.support[i]));
      h.f64(rec.values[i]);
    }
    h.u64(static_cast<std::uint64_t>(rec.passes));
    h.u64(static_cast<std::uint64_t>(rec.violations));
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.h));
  return buf;
}

const std::vector<std::string>& result_columns() {
  static const std::vector<std::string> cols = {
      "strategy",      "rho",           "n",
      "p",             "loss",          "seed",
      "total_time_s",  "cd_time_s",     "kkt_time_s",
      "gram_time_s",   "mean_screened", "mean_active",
      "total_violations", "total_passes", "steps",
      "termination_reason", "gamma",   "eps",
      "path_length",   "variant",       "row_id",
      "stalled",       "coef_hash",     "screen_time_s",
      "lambda_max"};
  return cols;
}

const std::vector<std::string>& step_columns() {
  static const std::vector<std::string> cols = {
      "row_id",      "step",       "lambda",      "screened",    "strong",
      "working",     "gap_safe",   "active",      "ever_active", "violations",
      "passes",      "rounds",     "duality_gap", "dev_ratio",   "precond_alpha",
      "cd_time_s",   "kkt_time_s", "gram_time_s", "screen_time_s", "wall_time_s"};
  return cols;
}

bool is_time_column(const std::string& name) {
  return name.size() >= 7 && name.compare(name.size() - 7, 7, "_time_s") == 0;
}

void write_results(std::ostream& out, const std::vector<BenchRow>& rows) {
  const auto& cols = result_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : rows) {
    out << r.strategy << ',' << fmt(r.rho) << ',' << r.n << ',' << r.p << ',' << r.loss << ','
        << r.seed << ',' << fmt(r.total_time_s) << ',' << fmt(r.cd_time_s) << ','
        << fmt(r.kkt_time_s) << ',' << fmt(r.gram_time_s) << ',' << fmt(r.mean_screened) << ','
        << fmt(r.mean_active) << ',' << r.total_violations << ',' << r.total_passes << ','
        << r.steps << ',' << r.termination_reason << ',' << fmt(r.gamma) << ',' << fmt(r.eps)
        << ',' << r.path_length << ',' << r.variant << ',' << r.row_id << ',' << r.stalled << ','
        << r.coef_hash << ',' << fmt(r.screen_time_s) << ',' << fmt(r.lambda_max) << '\n';
  }
}

void write_steps(std::ostream& out, const std::vector<StepRow>& steps) {
  const auto& cols = step_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& s : steps) {
    const auto& r = s.record;
    out << s.row_id << ',' << s.step << ',' << fmt(r.lambda) << ',' << r.screened_size << ','
        << r.strong_size << ',' << r.working_size << ',' << r.gap_safe_size << ','
        << r.active_size << ',' << r.ever_active_size << ',' << r.violations << ',' << r.passes
        << ',' << r.rounds << ',' << fmt(r.duality_gap) << ',' << fmt(r.deviance_ratio) << ','
        << fmt(r.precond_alpha) << ',' << fmt(r.cd_time) << ',' << fmt(r.kkt_time) << ','
        << fmt(r.gram_time) << ',' << fmt(r.screen_time) << ',' << fmt(r.wall_time) << '\n';
  }
}

std::size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error("csv: missing column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw Error("csv: empty input");
  t.header = split(line, ',');
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto fields = split(line, ',');
    if (fields.size() != t.header.size()) {
      throw Error("csv line " + std::to_string(line_no) + ": expected " +
                  std::to_string(t.header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
  }
  return t;
}

std::vector<BenchRow> read_results(std::istream& in) {
  const CsvTable t = read_csv(in);
  auto col = [&](const char* name) { return t.column(name); };
  const std::size_t c_strategy = col("strategy"), c_rho = col("rho"), c_n = col("n"),
                    c_p = col("p"), c_loss = col("loss"), c_seed = col("seed"),
                    c_total = col("total_time_s"), c_cd = col("cd_time_s"),
                    c_kkt = col("kkt_time_s"), c_gram = col("gram_time_s"),
                    c_screened = col("mean_screened"), c_active = col("mean_active"),
                    c_viol = col("total_violations"), c_passes = col("total_passes"),
                    c_steps = col("steps"), c_term = col("termination_reason"),
                    c_gamma = col("gamma"), c_eps = col("eps"), c_len = col("path_length"),
                    c_variant = col("variant"), c_row = col("row_id"), c_stalled = col("stalled"),
                    c_hash = col("coef_hash"), c_screen = col("screen_time_s"),
                    c_lmax = col("lambda_max");
  std::vector<BenchRow> rows;
  rows.reserve(t.rows.size());
  for (const auto& f : t.rows) {
    BenchRow r;
    r.strategy = f[c_strategy];
    r.rho = parse_double(f[c_rho]);
    r.n = parse_int(f[c_n]);
    r.p = parse_int(f[c_p]);
    r.loss = f[c_loss];
    r.seed = parse_uint(f[c_seed]);
    r.total_time_s = parse_double(f[c_total]);
    r.cd_time_s = parse_double(f[c_cd]);
    r.kkt_time_s = parse_double(f[c_kkt]);
    r.gram_time_s = parse_double(f[c_gram]);
    r.mean_screened = parse_double(f[c_screened]);
    r.mean_active = parse_double(f[c_active]);
    r.total_violations = parse_int(f[c_viol]);
    r.total_passes = parse_int(f[c_passes]);
    r.steps = parse_int(f[c_steps]);
    r.termination_reason = f[c_term];
    r.gamma = parse_double(f[c_gamma]);
    r.eps = parse_double(f[c_eps]);
    r.path_length = static_cast<int>(parse_int(f[c_len]));
    r.variant = f[c_variant];
    r.row_id = parse_int(f[c_row]);
    r.stalled = static_cast<int>(parse_int(f[c_stalled]));
    r.coef_hash = f[c_hash];
    r.screen_time_s = parse_double(f[c_screen]);
    r.lambda_max = parse_double(f[c_lmax]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::optional<std::string> compare_ignoring_times(const CsvTable& a, const CsvTable& b) {
  if (a.header != b.header) return "headers differ";
  if (a.rows.size() != b.rows.size()) {
    return "row counts differ (" + std::to_string(a.rows.size()) + " vs " +
           std::to_string(b.rows.size()) + ")";
  }
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    for (std::size_t c = 0; c < a.header.size(); ++c) {
      if (is_time_column(a.header[c])) continue;
      if (a.rows[i][c] != b.rows[i][c]) {
        return "row " + std::to_string(i) + " column " + a.header[c] + ": '" + a.rows[i][c] +
               "' vs '" + b.rows[i][c] + "'";
      }
    }
  }
  return std::nullopt;
}

std::vector<SummaryRow> summarize(const std::vector<BenchRow>& rows) {
  if (rows.empty()) throw Error("summarize: no rows");

  struct Metric {
    const char* name;
    double (*get)(const BenchRow&);
    bool time;
  };
  static const Metric metrics[] = {
      {"total_time_s", [](const BenchRow& r) { return r.total_time_s; }, true},
      {"cd_time_s", [](const BenchRow& r) { return r.cd_time_s; }, true},
      {"kkt_time_s", [](const BenchRow& r) { return r.kkt_time_s; }, true},
      {"gram_time_s", [](const BenchRow& r) { return r.gram_time_s; }, true},
      {"screen_time_s", [](const BenchRow& r) { return r.screen_time_s; }, true},
      {"mean_screened", [](const BenchRow& r) { return r.mean_screened; }, false},
      {"mean_active", [](const BenchRow& r) { return r.mean_active; }, false},
      {"total_violations", [](const BenchRow& r) { return static_cast<double>(r.total_violations); }, false},
      {"total_passes", [](const BenchRow& r) { return static_cast<double>(r.total_passes); }, false},
      {"steps", [](const BenchRow& r) { return static_cast<double>(r.steps); }, false},
      {"stalled", [](const BenchRow& r) { return static_cast<double>(r.stalled); }, false},
  };

  // Group keys are compared as formatted strings so nan rho groups together.
  auto condition_key = [](const BenchRow& r) {
    return r.loss + '|' + fmt(r.rho) + '|' + std::to_string(r.n) + '|' + std::to_string(r.p) +
           '|' + fmt(r.gamma) + '|' + fmt(r.eps) + '|' + std::to_string(r.path_length);
  };
  auto group_key = [&](const BenchRow& r) {
    return condition_key(r) + '|' + r.strategy + '|' + r.variant;
  };

  std::vector<std::string> order;
  std::map<std::string, std::vector<const BenchRow*>> groups;
  for (const auto& r : rows) {
    const auto key = group_key(r);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(&r);
  }

  std::vector<SummaryRow> out;
  for (const auto& key : order) {
    const auto& members = groups.at(key);
    const BenchRow& first = *members.front();
    for (const auto& m : metrics) {
      SummaryRow s;
      s.strategy = first.strategy;
      s.variant = first.variant;
      s.loss = first.loss;
      s.rho = first.rho;
      s.n = first.n;
      s.p = first.p;
      s.gamma = first.gamma;
      s.eps = first.eps;
      s.path_length = first.path_length;
      s.metric = m.name;
      s.count = members.size();
      double sum = 0.0;
      for (const BenchRow* r : members) sum += m.get(*r);
      s.mean = sum / static_cast<double>(s.count);
      if (s.count > 1) {
        double ss = 0.0;
        for (const BenchRow* r : members) ss += (m.get(*r) - s.mean) * (m.get(*r) - s.mean);
        s.se = std::sqrt(ss / static_cast<double>(s.count - 1)) /
               std::sqrt(static_cast<double>(s.count));
      }
      s.ci_low = s.mean - kZ95 * s.se;
      s.ci_high = s.mean + kZ95 * s.se;
      out.push_back(std::move(s));
    }
  }

  // Relative time within each condition block.
  std::map<std::string, double> best;
  auto block = [&](const SummaryRow& s) {
    return s.loss + '|' + fmt(s.rho) + '|' + std::to_string(s.n) + '|' + std::to_string(s.p) +
           '|' + fmt(s.gamma) + '|' + fmt(s.eps) + '|' + std::to_string(s.path_length) + '|' +
           s.metric;
  };
  for (const auto& s : out) {
    if (!is_time_column(s.metric)) continue;
    auto [it, inserted] = best.try_emplace(block(s), s.mean);
    if (!inserted) it->second = std::min(it->second, s.mean);
  }
  for (auto& s : out) {
    if (!is_time_column(s.metric)) continue;
    const double b = best.at(block(s));
    s.relative = b > 0.0 ? s.mean / b : 1.0;
  }
  return out;
}

void write_summary(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "strategy,variant,loss,rho,n,p,gamma,eps,path_length,metric,count,mean,se,ci_low,"
         "ci_high,relative\n";
  for (const auto& s : rows) {
    out << s.strategy << ',' << s.variant << ',' << s.loss << ',' << fmt(s.rho) << ',' << s.n
        << ',' << s.p << ',' << fmt(s.gamma) << ',' << fmt(s.eps) << ',' << s.path_length << ','
        << s.metric << ',' << s.count << ',' << fmt(s.mean) << ',' << fmt(s.se) << ','
        << fmt(s.ci_low) << ',' << fmt(s.ci_high) << ','
        << (s.relative ? fmt(*s.relative) : std::string()) << '\n';
  }
}

}  // namespace hesslasso
