// bench: command-line harness for path benchmarks.
//
//   bench <experiment> [options]     run and write results.csv / steps.csv
//   bench <experiment> ... --replay <row-id>   rerun one row, print it
//   bench summarize <results.csv> [--out file]
//   bench diff <a.csv> <b.csv>       compare ignoring time columns

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hesslasso/bench.hpp"

using namespace hesslasso;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> doubles(const std::string& s, const char* what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(std::string("bad value '") + item + "' for --" + what);
    }
  }
  return out;
}

std::vector<int> ints(const std::string& s, const char* what) {
  std::vector<int> out;
  for (double v : doubles(s, what)) {
    if (v != static_cast<int>(v)) throw Error(std::string("--") + what + " takes integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lasso path screening benchmarks"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string loss = "least_squares";
  std::string strategies;
  std::string rhos, gammas, epsilons, lengths;
  std::optional<double> xi;
  std::optional<long long> replay;
  std::optional<std::string> data;
  std::string out_dir;

  const char* experiments[] = {"timings",         "efficiency",  "violations",
                               "warmstarts",      "gamma_sweep", "tolerance_sweep",
                               "path_length",     "ablation",    "breakdown"};
  std::vector<CLI::App*> runs;
  for (const char* name : experiments) {
    auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
    sub->add_option("--n", spec.sim.n, "observations")->capture_default_str();
    sub->add_option("--p", spec.sim.p, "predictors")->capture_default_str();
    sub->add_option("--rho", rhos, "pairwise correlation(s), comma separated");
    sub->add_option("--s", spec.sim.s, "nonzero true coefficients")->capture_default_str();
    sub->add_option("--snr", spec.sim.snr, "signal-to-noise ratio")->capture_default_str();
    sub->add_option("--loss", loss, "least_squares | logistic | poisson")->capture_default_str();
    sub->add_option("--strategies", strategies, "hessian,strong,working_plus,gap_safe_only");
    sub->add_option("--reps", spec.repetitions, "repetitions")->capture_default_str();
    sub->add_option("--gamma", gammas, "inflation factor(s)");
    sub->add_option("--eps", epsilons, "relative tolerance(s)");
    sub->add_option("--path-length", lengths, "grid length(s)");
    sub->add_option("--xi", xi, "grid floor ratio");
    sub->add_option("--seed", spec.seed, "base seed")->capture_default_str();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", spec.workers, "worker threads (0 = all cores)");
    sub->add_option("--replay", replay, "rerun one row id and print it");
    sub->add_option("--data", data, "libsvm dataset instead of simulation");
    sub->add_flag("--drop-duplicates", spec.drop_duplicates, "drop duplicated dataset columns");
    runs.push_back(sub);
  }

  std::string summary_in, summary_out;
  auto* summ = app.add_subcommand("summarize", "aggregate a results CSV");
  summ->add_option("input", summary_in, "results.csv")->required();
  summ->add_option("--out", summary_out, "output file (default stdout)");

  std::string diff_a, diff_b;
  auto* diff = app.add_subcommand("diff", "compare two CSVs ignoring time columns");
  diff->add_option("a", diff_a)->required();
  diff->add_option("b", diff_b)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (summ->parsed()) {
      auto in = open_input(summary_in);
      const auto rows = summarize(read_results(in));
      if (summary_out.empty()) {
        write_summary(std::cout, rows);
      } else {
        std::ofstream out(summary_out);
        if (!out) throw Error("cannot write '" + summary_out + "'");
        write_summary(out, rows);
      }
      return 0;
    }
    if (diff->parsed()) {
      auto a = open_input(diff_a);
      auto b = open_input(diff_b);
      if (auto d = compare_ignoring_times(read_csv(a), read_csv(b))) {
        std::cerr << "bench: differ: " << *d << '\n';
        return 1;
      }
      return 0;
    }

    for (auto* sub : runs) {
      if (sub->parsed()) spec.experiment = parse_experiment(sub->get_name());
    }
    spec.sim.response = parse_loss(loss);
    for (const auto& s : split_list(strategies)) spec.strategies.push_back(parse_strategy(s));
    spec.rhos = doubles(rhos, "rho");
    spec.gammas = doubles(gammas, "gamma");
    spec.epsilons = doubles(epsilons, "eps");
    spec.path_lengths = ints(lengths, "path-length");
    spec.xi = xi;
    spec.data_path = data;

    if (replay) {
      const auto result = run_experiment(spec, *replay);
      write_results(std::cout, result.rows);
      return 0;
    }
    spec.out_dir = out_dir;
    const auto result = run_experiment(spec);
    if (out_dir.empty()) write_results(std::cout, result.rows);
    std::size_t stalled = 0;
    for (const auto& r : result.rows) stalled += r.stalled ? 1 : 0;
    if (stalled) std::cerr << "bench: " << stalled << " row(s) stalled\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "bench: error: " << e.what() << '\n';
    return 2;
  }
}
