#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ensbench/classifier.hpp"
#include "ensbench/dataset.hpp"
#include "ensbench/ensemble.hpp"
#include "ensbench/network.hpp"

namespace ensbench {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DatasetSpec {
  std::string name;
  std::filesystem::path csv;
  std::filesystem::path schema;
};

struct ExperimentConfig {
  std::uint64_t master_seed = 0;
  std::vector<DatasetSpec> datasets;
  std::vector<LearnerKind> learners{LearnerKind::tree, LearnerKind::network};
  std::vector<Method> methods{Method::single, Method::simple, Method::bagging, Method::arcing,
                              Method::ada};
  std::size_t members = 25;
  std::size_t cv_runs = 5;
  std::size_t cv_folds = 10;
  /// Replaces the named-dataset preset or size-based fallback.
  std::map<std::string, NetworkConfig> network_overrides;

  /// Throws ConfigError.
  void validate() const;
};

struct ExecutionOptions {
  /// Worker count; 0 means std::thread::hardware_concurrency().
  std::size_t threads = 0;
};

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, const ExecutionOptions& options,
                  const std::function<void(std::size_t)>& fn);

struct CellResult {
  std::string dataset;
  LearnerKind learner = LearnerKind::tree;
  Method method = Method::single;
  std::size_t members = 1;
  std::size_t run = 0;
  std::size_t fold = 0;
  std::size_t misclassified = 0;
  std::size_t tested = 0;

  double error() const { return static_cast<double>(misclassified) / static_cast<double>(tested); }
  friend bool operator==(const CellResult&, const CellResult&) = default;
};

/// Orders by (dataset, learner, method, members, run, fold).
bool cell_less(const CellResult& a, const CellResult& b);

/// Fraction of mismatched entries; throws std::invalid_argument on a length
/// mismatch or empty input.
double error_rate(std::span<const std::size_t> predictions, std::span<const std::size_t> labels);

/// Network configuration used for `data`: the override when present,
/// otherwise lookup_network_config on its encoded widths and size.
NetworkConfig resolve_network_config(const ExperimentConfig& config, const Dataset& data);

/// Seed of the fold plan for one (dataset, learner, method, run). Fold plans
/// are independent per method.
std::uint64_t fold_seed(std::uint64_t master, std::string_view dataset, LearnerKind learner,
                        Method method, std::size_t run);
/// Seed of the ensemble trained on one fold.
std::uint64_t ensemble_seed(std::uint64_t master, std::string_view dataset, LearnerKind learner,
                            Method method, std::size_t run, std::size_t fold);

/// Loads every configured dataset (throws before any training if one fails).
std::vector<Dataset> load_datasets(const ExperimentConfig& config);

/// Every (learner, method) pair the config asks for. Simple is skipped for
/// trees.
std::vector<std::pair<LearnerKind, Method>> method_grid(const ExperimentConfig& config);

/// Repeated k-fold cross-validation. Results are sorted with cell_less.
std::vector<CellResult> run_cv(const ExperimentConfig& config, const ExecutionOptions& options = {});
/// Same, over already-loaded datasets (names come from Dataset::name()).
std::vector<CellResult> run_cv(const ExperimentConfig& config, const std::vector<Dataset>& datasets,
                               const ExecutionOptions& options = {});

inline constexpr double kNoValue = std::numeric_limits<double>::quiet_NaN();

struct ReportRow {
  std::string dataset;
  LearnerKind learner = LearnerKind::tree;
  Method method = Method::single;
  std::size_t runs = 0;
  double error_mean = kNoValue;  // percent
  double error_sd = kNoValue;    // percent, population SD over runs
  double best_single = kNoValue; // percent, lowest per-run single error
  double pct_reduction = kNoValue;
  double ratio = kNoValue;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;  // sorted by (dataset, learner, method)
};

/// Per-run error is total misclassified over total tested across that run's
/// folds. Derived columns need the (dataset, learner, single) row; without it
/// they stay NaN, or ConfigError is thrown when `require_baseline` is set.
/// Throws std::invalid_argument when a run's fold indices are not 0..k-1.
ExperimentReport aggregate(const std::vector<CellResult>& cells, bool require_baseline = false);

struct SweepPoint {
  std::string dataset;  // "composite" for the unweighted mean over datasets
  LearnerKind learner = LearnerKind::tree;
  Method method = Method::single;
  std::size_t members = 1;
  double error_mean = 0.0;  // percent
};

/// Builds each fold's ensemble once with `max_members` members and scores
/// every prefix size in `eval_sizes`. Cells carry the prefix size in
/// `members`.
std::vector<CellResult> size_sweep(const ExperimentConfig& config, std::size_t max_members,
                                   const std::vector<std::size_t>& eval_sizes,
                                   const ExecutionOptions& options = {});
std::vector<CellResult> size_sweep(const ExperimentConfig& config,
                                   const std::vector<Dataset>& datasets, std::size_t max_members,
                                   const std::vector<std::size_t>& eval_sizes,
                                   const ExecutionOptions& options = {});

/// Mean error per (dataset, learner, method, members) plus composite rows.
std::vector<SweepPoint> sweep_curves(const std::vector<CellResult>& cells);

struct NoiseRow {
  std::string dataset;
  double level = 0.0;  // fraction
  Method method = Method::single;
  std::size_t replicas = 0;
  double error_mean = 0.0;  // percent, mean over replicas
  double reduction = 0.0;   // single error minus method error, percentage points
};

struct NoiseCell {
  double level = 0.0;
  CellResult cell;  // run index = replica
};

struct NoiseStudyResult {
  std::vector<NoiseCell> cells;
  std::vector<NoiseRow> rows;
};

/// Seed of replica `replica` of `dataset` at noise `level`.
std::uint64_t noise_seed(std::uint64_t master, std::string_view dataset, double level,
                         std::size_t replica);

/// Networks only; config.methods must include single. Each replica is one
/// k-fold CV over a noisy copy made by inject_noise, with the replica index
/// as the run index, so level 0 reproduces run_cv.
NoiseStudyResult noise_study(const ExperimentConfig& config, const std::vector<double>& levels,
                             std::size_t replicas, const ExecutionOptions& options = {});
NoiseStudyResult noise_study(const ExperimentConfig& config, const std::vector<Dataset>& datasets,
                             const std::vector<double>& levels, std::size_t replicas,
                             const ExecutionOptions& options = {});

struct SyntheticOptions {
  std::size_t datasets = 5;
  double noise = 0.20;
  std::size_t max_members = 100;
  std::size_t train_size = 800;
  std::size_t test_size = 2000;
  std::size_t ensembles_per_dataset = 5;
  std::vector<Method> methods{Method::bagging, Method::arcing, Method::ada};
  NetworkConfig perceptron{0, 20, 0.15, 0.9, 0.5};
};

struct SyntheticPoint {
  std::string dataset;  // "synthetic-<i>" or "mean"
  Method method = Method::bagging;
  std::size_t members = 1;
  double error = 0.0;  // percent on the clean test set, averaged over ensembles
};

/// Error-vs-size curves for every prefix 1..max_members.
std::vector<SyntheticPoint> synthetic_study(const SyntheticOptions& options, std::uint64_t seed,
                                            const ExecutionOptions& exec = {});

struct SignTestResult {
  std::size_t wins = 0;
  std::size_t losses = 0;
  std::size_t ties = 0;
  double p_value = 1.0;
};

/// Two-tailed sign test: p = 2 * P(X >= max(wins, losses)), X ~ Bin(n, 1/2),
/// capped at 1. Throws std::invalid_argument when wins + losses = 0.
double sign_test(std::size_t wins, std::size_t losses);

/// A win is a strictly lower method error; equal errors are ties and dropped.
SignTestResult sign_test_errors(const std::vector<double>& method_errors,
                                const std::vector<double>& baseline_errors);

struct CorrelationMatrix {
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;
};

/// Pearson correlation between every pair of named vectors; the diagonal is
/// exactly 1. Throws std::invalid_argument on vectors shorter than 3, of
/// unequal length, or with zero variance (naming the vector).
CorrelationMatrix correlation_matrix(const std::vector<std::string>& names,
                                     const std::vector<std::vector<double>>& vectors);

}  // namespace ensbench
