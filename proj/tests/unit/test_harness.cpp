#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <map>
#include <set>

#include "ensbench/harness.hpp"
#include "ensbench/noise.hpp"

using namespace ensbench;

namespace {

const std::string kDataDir = ENSBENCH_DATA_DIR;

DatasetSpec spec(const std::string& name) {
  return {name, kDataDir + "/" + name + ".csv", kDataDir + "/" + name + ".schema"};
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.master_seed = 11;
  c.datasets = {spec("iris")};
  c.learners = {LearnerKind::tree};
  c.methods = {Method::single, Method::bagging};
  c.members = 3;
  c.cv_runs = 2;
  c.cv_folds = 5;
  return c;
}

std::vector<CellResult> run_cells(const std::vector<double>& run_errors_pct, Method method,
                                  const std::string& dataset = "d") {
  std::vector<CellResult> cells;
  for (std::size_t r = 0; r < run_errors_pct.size(); ++r) {
    // Two folds of 500 tested examples each.
    const auto wrong = static_cast<std::size_t>(std::llround(run_errors_pct[r] * 10));
    cells.push_back({dataset, LearnerKind::tree, method, 1, r, 0, wrong / 2, 500});
    cells.push_back({dataset, LearnerKind::tree, method, 1, r, 1, wrong - wrong / 2, 500});
  }
  return cells;
}

// n choose k for small n by Pascal's triangle.
std::uint64_t choose(unsigned n, unsigned k) {
  std::vector<std::vector<std::uint64_t>> t(n + 1);
  for (unsigned i = 0; i <= n; ++i) {
    t[i].assign(i + 1, 1);
    for (unsigned j = 1; j < i; ++j) t[i][j] = t[i - 1][j - 1] + t[i - 1][j];
  }
  return t[n][k];
}

}  // namespace

TEST(Config, Validation) {
  ExperimentConfig c = small_config();
  EXPECT_NO_THROW(c.validate());
  c.members = 0;
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "members must be ≥ 1");
  }
  c = small_config();
  c.methods = {Method::simple};
  try {
    c.validate();
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "simple requires network learner");
  }
  c = small_config();
  c.cv_folds = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.datasets.push_back(spec("iris"));
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ParallelFor, EachIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), ExecutionOptions{4}, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(ParallelFor, RethrowsWorkerErrors) {
  EXPECT_THROW(parallel_for(50, ExecutionOptions{3},
                            [](std::size_t i) {
                              if (i == 17) throw std::runtime_error("boom");
                            }),
               std::runtime_error);
}

TEST(ErrorRate, Counting) {
  const std::vector<std::size_t> labels{0, 1, 2, 0, 1, 2, 0, 1, 2, 0};
  EXPECT_DOUBLE_EQ(error_rate(labels, labels), 0.0);
  std::vector<std::size_t> wrong(labels);
  for (auto& w : wrong) w = (w + 1) % 3;
  EXPECT_DOUBLE_EQ(error_rate(wrong, labels), 1.0);
  std::vector<std::size_t> three(labels);
  three[0] = 1;
  three[4] = 0;
  three[9] = 2;
  EXPECT_DOUBLE_EQ(error_rate(three, labels), 0.3);
  EXPECT_THROW(error_rate(std::vector<std::size_t>{1}, labels), std::invalid_argument);
}

TEST(Aggregate, ConstantRuns) {
  const auto report = aggregate(run_cells({3.4, 3.4, 3.4, 3.4, 3.4}, Method::single));
  ASSERT_EQ(report.rows.size(), 1u);
  EXPECT_NEAR(report.rows[0].error_mean, 3.4, 1e-12);
  EXPECT_NEAR(report.rows[0].error_sd, 0.0, 1e-12);
  EXPECT_EQ(report.rows[0].runs, 5u);
}

TEST(Aggregate, PopulationSd) {
  const auto report = aggregate(run_cells({2, 3, 4, 5, 6}, Method::single));
  EXPECT_NEAR(report.rows[0].error_mean, 4.0, 1e-12);
  EXPECT_NEAR(report.rows[0].error_sd, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(report.rows[0].best_single, 2.0, 1e-12);
}

TEST(Aggregate, ReductionAndRatio) {
  auto cells = run_cells({10, 10}, Method::single);
  const auto ens = run_cells({5, 5}, Method::bagging);
  cells.insert(cells.end(), ens.begin(), ens.end());
  const auto report = aggregate(cells);
  ASSERT_EQ(report.rows.size(), 2u);
  const auto& bag = report.rows[0].method == Method::bagging ? report.rows[0] : report.rows[1];
  EXPECT_NEAR(bag.pct_reduction, 50.0, 1e-12);
  EXPECT_NEAR(bag.ratio, 0.5, 1e-12);
  EXPECT_NEAR(bag.best_single, 10.0, 1e-12);
}

TEST(Aggregate, MissingBaseline) {
  const auto cells = run_cells({5, 5}, Method::bagging);
  EXPECT_TRUE(std::isnan(aggregate(cells).rows[0].ratio));
  EXPECT_THROW(aggregate(cells, true), ConfigError);
}

TEST(Aggregate, IncompleteRunIsRejected) {
  auto cells = run_cells({5, 5}, Method::single);
  cells.erase(cells.begin());
  EXPECT_THROW(aggregate(cells), std::invalid_argument);
}

TEST(RunCv, EveryExampleTestedOncePerRun) {
  const ExperimentConfig c = small_config();
  const auto cells = run_cv(c, ExecutionOptions{1});
  std::map<std::tuple<Method, std::size_t>, std::size_t> tested;
  for (const auto& cell : cells) {
    tested[{cell.method, cell.run}] += cell.tested;
    EXPECT_EQ(cell.members, cell.method == Method::single ? 1u : 3u);
  }
  EXPECT_EQ(tested.size(), 4u);
  for (const auto& [key, n] : tested) EXPECT_EQ(n, 150u);
  EXPECT_EQ(cells.size(), 2u * 2 * 5);
}

TEST(RunCv, PerRunErrorIsPooledFoldErrors) {
  const auto cells = run_cv(small_config(), ExecutionOptions{1});
  const auto report = aggregate(cells);
  for (const auto& row : report.rows) {
    double sum = 0.0;
    for (std::size_t run = 0; run < 2; ++run) {
      std::size_t wrong = 0;
      for (const auto& c : cells) {
        if (c.method == row.method && c.run == run) wrong += c.misclassified;
      }
      sum += 100.0 * wrong / 150.0;
    }
    EXPECT_NEAR(row.error_mean, sum / 2, 1e-12);
  }
}

TEST(RunCv, ThreadCountDoesNotChangeResults) {
  const ExperimentConfig c = small_config();
  EXPECT_EQ(run_cv(c, ExecutionOptions{1}), run_cv(c, ExecutionOptions{3}));
}

TEST(RunCv, MissingDatasetFailsBeforeTraining) {
  ExperimentConfig c = small_config();
  c.datasets.push_back({"ghost", "/nonexistent/ghost.csv", "/nonexistent/ghost.schema"});
  EXPECT_THROW(run_cv(c), ConfigError);
}

TEST(RunCv, FoldPlansDifferPerMethod) {
  EXPECT_NE(fold_seed(1, "iris", LearnerKind::tree, Method::single, 0),
            fold_seed(1, "iris", LearnerKind::tree, Method::bagging, 0));
}

TEST(SizeSweep, PrefixMatchesStandaloneEnsembles) {
  ExperimentConfig c = small_config();
  c.cv_runs = 1;
  c.methods = {Method::bagging, Method::arcing};
  const auto sweep = size_sweep(c, 4, {1, 2, 4}, ExecutionOptions{1});
  for (std::size_t s : {1u, 2u, 4u}) {
    ExperimentConfig fixed = c;
    fixed.members = s;
    const auto cv = run_cv(fixed, ExecutionOptions{1});
    std::vector<CellResult> picked;
    for (const auto& cell : sweep) {
      if (cell.members == s) picked.push_back(cell);
    }
    EXPECT_EQ(picked, cv) << "size " << s;
  }
}

TEST(SizeSweep, CurvesAndComposite) {
  ExperimentConfig c = small_config();
  c.cv_runs = 1;
  c.datasets.push_back(spec("glass"));
  c.methods = {Method::bagging};
  const auto points = sweep_curves(size_sweep(c, 5, {1, 3, 5}, ExecutionOptions{1}));
  std::map<std::pair<std::string, std::size_t>, double> e;
  for (const auto& p : points) e[{p.dataset, p.members}] = p.error_mean;
  EXPECT_EQ(points.size(), 9u);
  for (std::size_t s : {1u, 3u, 5u}) {
    const double expected = (e[{"iris", s}] + e[{"glass", s}]) / 2;
    EXPECT_NEAR((e[{"composite", s}]), expected, 1e-12);
  }
}

TEST(SizeSweep, RejectsSizesBeyondMax) {
  EXPECT_THROW(size_sweep(small_config(), 3, {1, 5}), ConfigError);
}

TEST(SignTest, HandValues) {
  EXPECT_DOUBLE_EQ(sign_test(5, 5), 1.0);
  EXPECT_NEAR(sign_test(23, 0), 2.0 / 8388608.0, 1e-20);
  EXPECT_NEAR(sign_test(18, 5), 2.0 * 44552 / 8388608.0, 1e-15);
  EXPECT_NEAR(sign_test(18, 5), 0.01062, 1e-5);
  EXPECT_THROW(sign_test(0, 0), std::invalid_argument);
}

TEST(SignTest, MatchesExactBinomialSums) {
  for (unsigned n = 1; n <= 40; ++n) {
    for (unsigned w = 0; w <= n; ++w) {
      const unsigned k = std::max(w, n - w);
      long double tail = 0;
      for (unsigned i = k; i <= n; ++i) tail += choose(n, i);
      const double expected = std::min(1.0L, 2 * tail / std::pow(2.0L, n));
      EXPECT_NEAR(sign_test(w, n - w), expected, 1e-12 * std::max(1.0, expected));
      EXPECT_DOUBLE_EQ(sign_test(w, n - w), sign_test(n - w, w));
    }
  }
}

TEST(SignTest, FromErrorColumnsDropsTies) {
  const auto r = sign_test_errors({1, 2, 3, 4}, {2, 2, 4, 3});
  EXPECT_EQ(r.wins, 2u);
  EXPECT_EQ(r.losses, 1u);
  EXPECT_EQ(r.ties, 1u);
  EXPECT_DOUBLE_EQ(r.p_value, sign_test(2, 1));
}

TEST(Correlation, BasicProperties) {
  const std::vector<double> x{1, 2, 3, 5, 8};
  std::vector<double> neg(x), other{2, 1, 4, 3, 9};
  for (double& v : neg) v = 10 - v;
  const auto m = correlation_matrix({"x", "neg", "other"}, {x, neg, other});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(m.values[i][i], 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_EQ(m.values[i][j], m.values[j][i]);
      EXPECT_LE(std::abs(m.values[i][j]), 1.0);
    }
  }
  EXPECT_NEAR(m.values[0][1], -1.0, 1e-15);
  // Brute-force Pearson with the textbook formula.
  const double n = 5;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < 5; ++i) {
    sx += x[i];
    sy += other[i];
    sxx += x[i] * x[i];
    syy += other[i] * other[i];
    sxy += x[i] * other[i];
  }
  const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  EXPECT_NEAR(m.values[0][2], r, 1e-12);
}

TEST(Correlation, ZeroVarianceNamesTheVector) {
  try {
    correlation_matrix({"ok", "flat"}, {{1, 2, 3}, {4, 4, 4}});
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("flat"), std::string::npos);
  }
  EXPECT_THROW(correlation_matrix({"a", "b"}, {{1, 2}, {2, 1}}), std::invalid_argument);
}

TEST(NoiseStudy, LevelZeroReproducesCleanCv) {
  ExperimentConfig c = small_config();
  c.learners = {LearnerKind::network};
  NetworkConfig quick;
  quick.epochs = 3;
  c.network_overrides["iris"] = quick;
  const auto clean = run_cv(c, ExecutionOptions{1});
  const auto study = noise_study(c, {0.0}, c.cv_runs, ExecutionOptions{1});
  std::vector<CellResult> cells;
  for (const auto& nc : study.cells) cells.push_back(nc.cell);
  std::sort(cells.begin(), cells.end(), cell_less);
  EXPECT_EQ(cells, clean);
}

TEST(NoiseStudy, ReplicaCountAndReductionArithmetic) {
  ExperimentConfig c = small_config();
  c.learners = {LearnerKind::network};
  c.cv_folds = 2;
  c.members = 2;
  NetworkConfig quick;
  quick.epochs = 1;
  c.network_overrides["iris"] = quick;
  const auto study = noise_study(c, {0.05, 0.10, 0.20, 0.30}, 5, ExecutionOptions{1});
  std::set<std::pair<double, std::size_t>> copies;
  for (const auto& nc : study.cells) copies.insert({nc.level, nc.cell.run});
  EXPECT_EQ(copies.size(), 20u);
  std::map<std::pair<double, Method>, NoiseRow> rows;
  for (const auto& r : study.rows) rows[{r.level, r.method}] = r;
  for (double level : {0.05, 0.10, 0.20, 0.30}) {
    const auto& single = rows[{level, Method::single}];
    const auto& bag = rows[{level, Method::bagging}];
    EXPECT_EQ(bag.replicas, 5u);
    EXPECT_NEAR(bag.reduction, single.error_mean - bag.error_mean, 1e-12);
    EXPECT_DOUBLE_EQ(single.reduction, 0.0);
  }
}

TEST(NoiseStudy, NeedsSingleBaseline) {
  ExperimentConfig c = small_config();
  c.methods = {Method::bagging};
  EXPECT_THROW(noise_study(c, {0.1}, 1), ConfigError);
}

TEST(SyntheticStudy, CleanConceptIsLearned) {
  SyntheticOptions o;
  o.datasets = 2;
  o.noise = 0.0;
  o.max_members = 5;
  o.ensembles_per_dataset = 2;
  o.train_size = 400;
  o.test_size = 500;
  const auto points = synthetic_study(o, 3, ExecutionOptions{1});
  EXPECT_EQ(points.size(), 3u * 5 * 3);
  for (const auto& p : points) {
    if (p.dataset == "mean") {
      EXPECT_LT(p.error, 5.0) << to_string(p.method) << " " << p.members;
    }
  }
}

TEST(SyntheticStudy, Deterministic) {
  SyntheticOptions o;
  o.datasets = 1;
  o.max_members = 3;
  o.ensembles_per_dataset = 1;
  o.train_size = 200;
  o.test_size = 100;
  const auto a = synthetic_study(o, 9, ExecutionOptions{1});
  const auto b = synthetic_study(o, 9, ExecutionOptions{2});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].error, b[i].error);
}
