#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ensbench/cli.hpp"

namespace ensbench {
namespace {

// Destination stream: a file opened before any work starts, or `fallback`.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
    if (!*file_) throw ConfigError("cannot write " + path);
    stream_ = file_.get();
  }
  std::ostream& stream() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_;
};

std::string join(const auto& items) {
  std::ostringstream s;
  bool first = true;
  for (const auto& item : items) {
    s << (first ? "" : ",") << item;
    first = false;
  }
  return s.str();
}

ExperimentConfig load_config(const std::string& path) {
  ExperimentConfig config = parse_config(path);
  apply_seed_override(config, std::getenv("ENSBENCH_SEED"));
  return config;
}

Preamble preamble_for(const std::string& command, const ExperimentConfig& config) {
  Preamble p{{"command: " + command}};
  for (auto& line : config_lines(config)) p.lines.push_back(std::move(line));
  return p;
}

Format format_of(const std::string& text) {
  const auto f = parse_format(text);
  if (!f) throw ConfigError("unknown format '" + text + "'");
  return *f;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

struct Flags {
  std::string config;
  std::string out;
  std::string report;
  std::string format = "csv";
  std::size_t threads = 0;

  std::size_t max_members = 100;
  std::vector<std::size_t> sizes;
  std::vector<double> levels{5, 10, 20, 30};
  std::size_t replicas = 5;

  std::size_t synthetic_datasets = 5;
  double synthetic_noise = 0.20;
  std::size_t ensembles = 5;
  std::size_t train_size = 800;
  std::size_t test_size = 2000;
  std::optional<std::uint64_t> seed;

  std::string results;
  std::string method;
  std::string learner;
  std::string baseline = "single";
};

void add_output_flags(CLI::App* cmd, Flags& f, bool with_report) {
  cmd->add_option("--out", f.out, "output file (default stdout)");
  if (with_report) cmd->add_option("--report", f.report, "aggregate output file");
  cmd->add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void add_exec_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
}

int do_run(const Flags& f, std::ostream& out) {
  const ExperimentConfig config = load_config(f.config);
  const Format format = format_of(f.format);
  Output cells_out(f.out, out);
  const bool report_to_stdout = f.out.empty() && f.report.empty();
  Output report_out(f.report, out);
  const auto cells = run_cv(config, ExecutionOptions{f.threads});
  const Preamble preamble = preamble_for("run", config);
  if (!f.out.empty()) write_cells(cells_out.stream(), cells, format, preamble);
  if (!f.report.empty() || report_to_stdout) {
    write_report(report_out.stream(), aggregate(cells), format, preamble);
  }
  return 0;
}

int do_sweep(const Flags& f, std::ostream& out) {
  const ExperimentConfig config = load_config(f.config);
  const Format format = format_of(f.format);
  std::vector<std::size_t> sizes = f.sizes;
  if (sizes.empty()) {
    sizes.resize(f.max_members);
    std::iota(sizes.begin(), sizes.end(), std::size_t{1});
  }
  Output cells_out(f.out, out);
  const bool curves_to_stdout = f.out.empty() && f.report.empty();
  Output curves_out(f.report, out);
  const auto cells = size_sweep(config, f.max_members, sizes, ExecutionOptions{f.threads});
  const Preamble preamble = preamble_for(
      "sweep --max-members " + std::to_string(f.max_members) + " --sizes " + join(sizes), config);
  if (!f.out.empty()) write_cells(cells_out.stream(), cells, format, preamble);
  if (!f.report.empty() || curves_to_stdout) {
    write_sweep(curves_out.stream(), sweep_curves(cells), format, preamble);
  }
  return 0;
}

int do_noise(const Flags& f, std::ostream& out) {
  const ExperimentConfig config = load_config(f.config);
  const Format format = format_of(f.format);
  std::vector<double> levels;
  for (double percent : f.levels) levels.push_back(percent / 100.0);
  Output rows_out(f.out, out);
  const auto study = noise_study(config, levels, f.replicas, ExecutionOptions{f.threads});
  write_noise(rows_out.stream(), study.rows, format,
              preamble_for("noise --levels " + join(f.levels) + " --replicas " +
                               std::to_string(f.replicas),
                           config));
  return 0;
}

int do_synthetic(const Flags& f, std::ostream& out) {
  SyntheticOptions options;
  options.datasets = f.synthetic_datasets;
  options.noise = f.synthetic_noise;
  options.max_members = f.max_members;
  options.ensembles_per_dataset = f.ensembles;
  options.train_size = f.train_size;
  options.test_size = f.test_size;
  ExperimentConfig seed_holder;
  apply_seed_override(seed_holder, std::getenv("ENSBENCH_SEED"));
  const std::uint64_t seed = f.seed.value_or(seed_holder.master_seed);
  const Format format = format_of(f.format);
  Output points_out(f.out, out);
  const auto points = synthetic_study(options, seed, ExecutionOptions{f.threads});
  std::ostringstream noise;
  noise << options.noise;
  write_synthetic(points_out.stream(), points, format,
                  {{"command: synthetic --datasets " + std::to_string(options.datasets) +
                    " --noise " + noise.str() + " --max-members " +
                    std::to_string(options.max_members) + " --ensembles " +
                    std::to_string(options.ensembles_per_dataset) + " --train " +
                    std::to_string(options.train_size) + " --test " +
                    std::to_string(options.test_size) + " --seed " + std::to_string(seed)}});
  return 0;
}

int do_sign(const Flags& f, std::ostream& out) {
  const Format format = format_of(f.format);
  const auto baseline = parse_method(f.baseline);
  if (!baseline) throw ConfigError("unknown baseline method '" + f.baseline + "'");
  std::optional<Method> only_method;
  if (!f.method.empty()) {
    only_method = parse_method(f.method);
    if (!only_method) throw ConfigError("unknown method '" + f.method + "'");
  }
  std::optional<LearnerKind> only_learner;
  if (!f.learner.empty()) {
    only_learner = parse_learner(f.learner);
    if (!only_learner) throw ConfigError("unknown learner '" + f.learner + "'");
  }
  Output sign_out(f.out, out);
  const ExperimentReport report = read_report(std::filesystem::path(f.results));

  std::map<std::pair<LearnerKind, Method>, std::map<std::string, double>> errors;
  for (const auto& r : report.rows) {
    if (!std::isnan(r.error_mean)) errors[{r.learner, r.method}][r.dataset] = r.error_mean;
  }
  std::vector<SignRow> rows;
  for (const auto& [key, by_dataset] : errors) {
    const auto [learner, method] = key;
    if (method == *baseline || (only_method && method != *only_method) ||
        (only_learner && learner != *only_learner)) {
      continue;
    }
    const auto base = errors.find({learner, *baseline});
    if (base == errors.end()) continue;
    std::vector<double> method_errors, baseline_errors;
    for (const auto& [dataset, e] : by_dataset) {
      if (const auto b = base->second.find(dataset); b != base->second.end()) {
        method_errors.push_back(e);
        baseline_errors.push_back(b->second);
      }
    }
    if (method_errors.empty()) continue;
    rows.push_back({learner, method, *baseline, sign_test_errors(method_errors, baseline_errors)});
  }
  if (rows.empty()) throw ConfigError("no method rows paired with a " + f.baseline + " baseline");
  write_sign_tests(sign_out.stream(), rows, format,
                   {{"command: stats sign --baseline " + f.baseline, "results: " + f.results}});
  return 0;
}

int do_correlate(const Flags& f, std::ostream& out) {
  const Format format = format_of(f.format);
  Output matrix_out(f.out, out);
  const RatioTable table = ratio_table(read_report(std::filesystem::path(f.results)));
  write_correlation(matrix_out.stream(), correlation_matrix(table.names, table.columns), format,
                    {{"command: stats correlate", "results: " + f.results,
                      "datasets: " + join(table.datasets)}});
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Ensemble benchmark: bagging, arcing and boosting over trees and networks",
               "ensbench"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "repeated cross-validation of every configured cell");
  run->add_option("--config", f.config, "experiment config")->required();
  add_output_flags(run, f, true);
  add_exec_flags(run, f);

  auto* sweep = app.add_subcommand("sweep", "error against ensemble size");
  sweep->add_option("--config", f.config, "experiment config")->required();
  sweep->add_option("--max-members", f.max_members, "members trained per fold")
      ->check(CLI::PositiveNumber);
  sweep->add_option("--sizes", f.sizes, "prefix sizes to score (default 1..max)")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  add_output_flags(sweep, f, true);
  add_exec_flags(sweep, f);

  auto* noise = app.add_subcommand("noise", "error under injected label noise");
  noise->add_option("--config", f.config, "experiment config")->required();
  noise->add_option("--levels", f.levels, "noise levels in percent")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 100.0));
  noise->add_option("--replicas", f.replicas, "noisy copies per level")->check(CLI::PositiveNumber);
  add_output_flags(noise, f, false);
  add_exec_flags(noise, f);

  auto* synthetic = app.add_subcommand("synthetic", "perceptron ensembles on one-sided noise");
  synthetic->add_option("--datasets", f.synthetic_datasets, "generated problems")
      ->check(CLI::PositiveNumber);
  synthetic->add_option("--noise", f.synthetic_noise, "flip fraction of the positive class")
      ->check(CLI::Range(0.0, 1.0));
  synthetic->add_option("--max-members", f.max_members, "largest ensemble")
      ->check(CLI::PositiveNumber);
  synthetic->add_option("--ensembles", f.ensembles, "ensembles per problem")
      ->check(CLI::PositiveNumber);
  synthetic->add_option("--train", f.train_size, "training points")->check(CLI::PositiveNumber);
  synthetic->add_option("--test", f.test_size, "clean test points")->check(CLI::PositiveNumber);
  synthetic->add_option("--seed", f.seed, "master seed (default ENSBENCH_SEED or 0)");
  add_output_flags(synthetic, f, false);
  add_exec_flags(synthetic, f);

  auto* stats = app.add_subcommand("stats", "tests over a report file");
  stats->require_subcommand(1);
  auto* sign = stats->add_subcommand("sign", "two-tailed sign test against a baseline");
  sign->add_option("--results", f.results, "report file (csv or json)")->required();
  sign->add_option("--method", f.method, "method to test (default all)");
  sign->add_option("--learner", f.learner, "learner to test (default all)");
  sign->add_option("--baseline", f.baseline, "baseline method");
  add_output_flags(sign, f, false);
  auto* correlate = stats->add_subcommand("correlate", "correlation of error ratios");
  correlate->add_option("--results", f.results, "report file (csv or json)")->required();
  add_output_flags(correlate, f, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "ensbench: error: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    if (run->parsed()) return do_run(f, out);
    if (sweep->parsed()) return do_sweep(f, out);
    if (noise->parsed()) return do_noise(f, out);
    if (synthetic->parsed()) return do_synthetic(f, out);
    if (sign->parsed()) return do_sign(f, out);
    if (correlate->parsed()) return do_correlate(f, out);
  } catch (const std::exception& e) {
    err << "ensbench: error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 1;
}

}  // namespace ensbench
