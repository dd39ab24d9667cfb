#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unistd.h>

#include "ensbench/cli.hpp"

using namespace ensbench;

namespace {

const std::string kDataDir = ENSBENCH_DATA_DIR;

std::string config_error(std::string_view text) {
  try {
    parse_config_text(text, "/base");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

void expect_same_config(const ExperimentConfig& a, const ExperimentConfig& b) {
  EXPECT_EQ(a.master_seed, b.master_seed);
  EXPECT_EQ(a.learners, b.learners);
  EXPECT_EQ(a.methods, b.methods);
  EXPECT_EQ(a.members, b.members);
  EXPECT_EQ(a.cv_runs, b.cv_runs);
  EXPECT_EQ(a.cv_folds, b.cv_folds);
  ASSERT_EQ(a.datasets.size(), b.datasets.size());
  for (std::size_t i = 0; i < a.datasets.size(); ++i) {
    EXPECT_EQ(a.datasets[i].name, b.datasets[i].name);
    EXPECT_EQ(a.datasets[i].csv, b.datasets[i].csv);
    EXPECT_EQ(a.datasets[i].schema, b.datasets[i].schema);
  }
  EXPECT_EQ(a.network_overrides, b.network_overrides);
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> lines;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ensbench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {status, out.str(), err.str()};
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("ensbench-cli-" + std::to_string(::getpid()) + "-" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  std::string write_config(const std::string& body) {
    const auto path = dir_ / ("exp" + std::to_string(++configs_) + ".cfg");
    std::ofstream(path) << body;
    return path.string();
  }

  std::string quick_config() {
    return write_config("master_seed = 5\n"
                        "dataset = iris," + kDataDir + "/iris.csv," + kDataDir + "/iris.schema\n"
                        "learners = tree\nmethods = single,bagging\nmembers = 3\ncv_runs = 1\n"
                        "cv_folds = 3\n");
  }

  std::filesystem::path dir_;
  int configs_ = 0;
};

}  // namespace

TEST(ParseConfig, DefaultsFillUnspecifiedKeys) {
  const auto c = parse_config_text("master_seed = 7\ndataset = iris,iris.csv,iris.schema\n", "/base");
  EXPECT_EQ(c.master_seed, 7u);
  EXPECT_EQ(c.members, 25u);
  EXPECT_EQ(c.cv_runs, 5u);
  EXPECT_EQ(c.cv_folds, 10u);
  EXPECT_EQ(c.learners, (std::vector<LearnerKind>{LearnerKind::tree, LearnerKind::network}));
  EXPECT_EQ(c.methods.size(), 5u);
  ASSERT_EQ(c.datasets.size(), 1u);
  EXPECT_EQ(c.datasets[0].csv, std::filesystem::path("/base/iris.csv"));
  EXPECT_EQ(c.datasets[0].schema, std::filesystem::path("/base/iris.schema"));
}

TEST(ParseConfig, ValidationMessages) {
  EXPECT_EQ(config_error("members = 0\n"), "members must be ≥ 1");
  EXPECT_EQ(config_error("methods = simple\nlearners = tree\n"), "simple requires network learner");
}

TEST(ParseConfig, SyntaxErrorsCarryLineNumbers) {
  EXPECT_EQ(config_error("master_seed = 1\ncolour = blue\n"), "line 2: unknown key 'colour'");
  EXPECT_EQ(config_error("# c\n\nmembers = ten\n"), "line 3: malformed members 'ten'");
  EXPECT_EQ(config_error("members = 3\nmembers = 4\n"), "line 2: duplicate key 'members'");
  EXPECT_EQ(config_error("dataset = a,x.csv,x.schema\ndataset = a,y.csv,y.schema\n"),
            "line 2: duplicate dataset 'a'");
  EXPECT_EQ(config_error("dataset = a,x.csv\n"), "line 1: dataset expects name,csv,schema");
  EXPECT_EQ(config_error("learners = tree,forest\n"), "line 1: unknown learner 'forest'");
  EXPECT_EQ(config_error("methods = bagging,stacking\n"), "line 1: unknown method 'stacking'");
  EXPECT_EQ(config_error("just words\n"), "line 1: expected 'key = value'");
  EXPECT_EQ(config_error("network.iris = hidden=4\n"), "line 1: network needs hidden and epochs");
  EXPECT_EQ(config_error("network.iris = hidden=4,epochs=10,speed=2\n"),
            "line 1: unknown network field 'speed'");
}

TEST(ParseConfig, NetworkOverridesAndComments) {
  const auto c = parse_config_text(
      "network.iris = hidden=4, epochs=12, learning_rate=0.2  # tuned\n", "/base");
  ASSERT_EQ(c.network_overrides.count("iris"), 1u);
  const auto& nc = c.network_overrides.at("iris");
  EXPECT_EQ(nc.hidden_units, 4u);
  EXPECT_EQ(nc.epochs, 12u);
  EXPECT_EQ(nc.learning_rate, 0.2);
  EXPECT_EQ(nc.momentum, 0.9);
}

TEST(ParseConfig, ConfigLinesRoundTrip) {
  const auto c = parse_config_text(
      "master_seed = 99\ndataset = a,/x/a.csv,/x/a.schema\ndataset = b,b.csv,b.schema\n"
      "learners = network\nmethods = single,simple,ada\nmembers = 7\ncv_runs = 2\ncv_folds = 4\n"
      "network.a = hidden=3,epochs=9,momentum=0.5,init_range=0.25\n",
      "/base");
  std::string text;
  for (const auto& line : config_lines(c)) text += line + "\n";
  expect_same_config(parse_config_text(text, "/elsewhere"), c);
}

TEST(SeedOverride, ReplacesMasterSeed) {
  ExperimentConfig c;
  c.master_seed = 3;
  apply_seed_override(c, nullptr);
  EXPECT_EQ(c.master_seed, 3u);
  apply_seed_override(c, "12345");
  EXPECT_EQ(c.master_seed, 12345u);
  EXPECT_THROW(apply_seed_override(c, "12x"), ConfigError);
}

TEST(Emit, SingleCellIsHeaderPlusRow) {
  std::ostringstream out;
  write_cells(out, {{"iris", LearnerKind::tree, Method::single, 1, 0, 0, 1, 30}}, Format::csv);
  EXPECT_EQ(out.str(), "dataset,learner,method,members,run,fold,error\n"
                       "iris,tree,single,1,0,0,3.3333\n");
}

TEST(Emit, CellsAreSorted) {
  std::ostringstream out;
  write_cells(out,
              {{"b", LearnerKind::tree, Method::single, 1, 0, 1, 0, 10},
               {"a", LearnerKind::network, Method::ada, 5, 1, 0, 1, 10},
               {"a", LearnerKind::network, Method::ada, 5, 0, 2, 2, 10},
               {"a", LearnerKind::tree, Method::single, 1, 0, 0, 3, 10}},
              Format::csv);
  EXPECT_EQ(out.str(),
            "dataset,learner,method,members,run,fold,error\n"
            "a,tree,single,1,0,0,30.0000\n"
            "a,network,ada,5,0,2,20.0000\n"
            "a,network,ada,5,1,0,10.0000\n"
            "b,tree,single,1,0,1,0.0000\n");
}

TEST(Emit, ReportColumnsAndMissingValues) {
  ExperimentReport r;
  r.rows.push_back({"iris", LearnerKind::tree, Method::bagging, 5, 4.0, 0.5, kNoValue, kNoValue,
                    kNoValue});
  std::ostringstream csv, json;
  write_report(csv, r, Format::csv, {{"master_seed = 1"}});
  EXPECT_EQ(csv.str(), "# master_seed = 1\n"
                       "dataset,learner,method,error_mean,error_sd,best_single,pct_reduction,ratio\n"
                       "iris,tree,bagging,4.0000,0.5000,,,\n");
  write_report(json, r, Format::json, {{"master_seed = 1"}});
  const auto doc = nlohmann::json::parse(json.str());
  EXPECT_EQ(doc["meta"]["config"][0], "master_seed = 1");
  const auto& row = doc["rows"][0];
  EXPECT_EQ(row["dataset"], "iris");
  EXPECT_EQ(row["method"], "bagging");
  EXPECT_EQ(row["error_mean"], 4.0);
  EXPECT_TRUE(row["ratio"].is_null());
  EXPECT_EQ(row.size(), 8u);
}

TEST(Emit, RejectsSeparatorInText) {
  std::ostringstream out;
  EXPECT_THROW(write_cells(out, {{"a,b", LearnerKind::tree, Method::single, 1, 0, 0, 0, 1}},
                           Format::csv),
               std::invalid_argument);
}

TEST(ReadReport, RoundTripsCsvAndJson) {
  ExperimentReport r;
  r.rows.push_back({"glass", LearnerKind::network, Method::single, 5, 37.5, 1.25, 35.0, 0.0, 1.0});
  r.rows.push_back({"glass", LearnerKind::network, Method::ada, 5, 30.0, 2.0, 35.0, 20.0, 0.8});
  for (Format f : {Format::csv, Format::json}) {
    std::stringstream s;
    write_report(s, r, f, {{"x = 1"}});
    const auto back = read_report(s);
    ASSERT_EQ(back.rows.size(), 2u);
    EXPECT_EQ(back.rows[0].method, Method::single);
    EXPECT_EQ(back.rows[1].error_mean, 30.0);
    EXPECT_EQ(back.rows[1].pct_reduction, 20.0);
    EXPECT_EQ(back.rows[1].ratio, 0.8);
  }
}

TEST(ReadReport, MinimalColumnsAndErrors) {
  std::istringstream minimal("dataset,learner,method,error_mean\niris,tree,ada,5.6\n");
  const auto r = read_report(minimal);
  ASSERT_EQ(r.rows.size(), 1u);
  EXPECT_EQ(r.rows[0].error_mean, 5.6);
  EXPECT_TRUE(std::isnan(r.rows[0].error_sd));

  std::istringstream no_error("dataset,learner,method\niris,tree,ada\n");
  EXPECT_THROW(read_report(no_error), ConfigError);
  std::istringstream bad_number("dataset,learner,method,error_mean\niris,tree,ada,x\n");
  try {
    read_report(bad_number, "f.csv");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_STREQ(e.what(), "f.csv:2: malformed number 'x'");
  }
}

TEST(RatioTable, OrdersColumnsAndSkipsIncompleteDatasets) {
  std::istringstream in(
      "dataset,learner,method,error_mean\n"
      "a,tree,single,10\na,tree,bagging,5\na,network,single,4\na,network,ada,2\n"
      "b,tree,single,20\nb,tree,bagging,10\nb,network,single,8\nb,network,ada,6\n"
      "c,tree,single,20\nc,tree,bagging,10\n");
  const auto t = ratio_table(read_report(in));
  EXPECT_EQ(t.names, (std::vector<std::string>{"ada-network", "bagging-tree"}));
  EXPECT_EQ(t.datasets, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.columns[0], (std::vector<double>{0.5, 0.75}));
  EXPECT_EQ(t.columns[1], (std::vector<double>{0.5, 0.5}));
}

TEST_F(TempDir, RunWritesCellsAndReport) {
  const auto cfg = quick_config();
  const auto cells = (dir_ / "cells.csv").string();
  const auto report = (dir_ / "report.csv").string();
  const auto r = cli({"run", "--config", cfg, "--out", cells, "--report", report, "--threads", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_TRUE(r.err.empty());
  const auto cell_lines = lines_of(slurp(cells));
  EXPECT_EQ(cell_lines[0], "# command: run");
  std::size_t rows = 0;
  for (const auto& l : cell_lines) rows += !l.empty() && l[0] != '#';
  EXPECT_EQ(rows, 1u + 2 * 3);
  const auto rep = read_report(std::filesystem::path(report));
  EXPECT_EQ(rep.rows.size(), 2u);
}

TEST_F(TempDir, PreambleReplaysTheConfig) {
  const auto r = cli({"run", "--config", quick_config(), "--threads", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  std::string text;
  for (const auto& line : lines_of(r.out)) {
    if (line.rfind("# ", 0) == 0 && line.find('=') != std::string::npos) text += line.substr(2) + "\n";
  }
  expect_same_config(parse_config_text(text, "/"), parse_config(quick_config()));
}

TEST_F(TempDir, RepeatedRunsAreByteIdentical) {
  const auto cfg = quick_config();
  const auto a = (dir_ / "a.csv").string();
  const auto b = (dir_ / "b.csv").string();
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", a, "--threads", "1"}).status, 0);
  ASSERT_EQ(cli({"run", "--config", cfg, "--out", b, "--threads", "2"}).status, 0);
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST_F(TempDir, SeedFromEnvironment) {
  const auto cfg = quick_config();
  ::setenv("ENSBENCH_SEED", "424242", 1);
  const auto r = cli({"run", "--config", cfg, "--threads", "1"});
  ::unsetenv("ENSBENCH_SEED");
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("# master_seed = 424242\n"), std::string::npos);
}

TEST_F(TempDir, FailuresExitNonzeroWithOneLine) {
  for (const auto& args : std::vector<std::vector<std::string>>{
           {},
           {"frobnicate"},
           {"run"},
           {"run", "--config", (dir_ / "missing.cfg").string()},
           {"run", "--config", write_config("members = 0\n")},
           {"run", "--config", quick_config(), "--out", (dir_ / "no/such/dir.csv").string()},
           {"run", "--config", quick_config(), "--format", "xml"},
           {"stats", "sign", "--results", (dir_ / "none.csv").string()},
       }) {
    const auto r = cli(args);
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(lines_of(r.err).size(), 1u) << r.err;
    EXPECT_EQ(r.err.rfind("ensbench: error: ", 0), 0u) << r.err;
  }
}

TEST_F(TempDir, SweepAndNoiseAndSynthetic) {
  auto r = cli({"sweep", "--config", quick_config(), "--max-members", "3", "--sizes", "1,3",
                "--threads", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("dataset,learner,method,members,error_mean\n"), std::string::npos);
  EXPECT_NE(r.out.find("composite,tree,bagging,3,"), std::string::npos);

  const auto net = write_config("master_seed = 5\n"
                                "dataset = iris," + kDataDir + "/iris.csv," + kDataDir +
                                "/iris.schema\nlearners = network\nmethods = single,bagging\n"
                                "members = 2\ncv_runs = 1\ncv_folds = 2\n"
                                "network.iris = hidden=2,epochs=1\n");
  r = cli({"noise", "--config", net, "--levels", "0,10", "--replicas", "2", "--threads", "1"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("iris,10.0000,bagging,2,"), std::string::npos);

  r = cli({"synthetic", "--datasets", "1", "--max-members", "2", "--ensembles", "1", "--train",
           "50", "--test", "50", "--seed", "3", "--format", "json"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["rows"].size(), 2u * 3 * 2);
}

TEST(Stats, SignAndCorrelateOnReferenceErrors) {
  const std::string ref = kDataDir + "/reference_errors.csv";
  auto r = cli({"stats", "sign", "--results", ref, "--method", "arcing", "--learner", "network"});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("network,arcing,single,18,5,0,0.010622\n"), std::string::npos);

  r = cli({"stats", "correlate", "--results", ref});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("name,simple-network,bagging-network,arcing-network,ada-network,"
                       "bagging-tree,arcing-tree,ada-tree\n"),
            std::string::npos);
}
