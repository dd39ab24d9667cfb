#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ensbench/harness.hpp"

namespace ensbench {

/// Parses the line-oriented `key = value` format. `#` starts a comment.
/// Keys: master_seed, dataset (repeatable, `name,csv,schema`), learners,
/// methods, members, cv_runs, cv_folds and `network.<dataset>` with
/// `hidden=H,epochs=E[,learning_rate=L][,momentum=M][,init_range=R]`.
/// Relative dataset paths resolve against `base_dir`. Syntax errors throw
/// ConfigError prefixed with "line N: "; the result is validated.
ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir);
/// Reads `path` and resolves relative dataset paths against its directory.
ExperimentConfig parse_config(const std::filesystem::path& path);

/// Replaces master_seed with the value of `env_value` when present.
/// Throws ConfigError on a non-integer value.
void apply_seed_override(ExperimentConfig& config, const char* env_value);

/// Config lines that parse_config_text reads back to the same config.
std::vector<std::string> config_lines(const ExperimentConfig& config);

enum class Format { csv, json };
std::optional<Format> parse_format(std::string_view text);

/// Metadata written before the rows: "# " lines in CSV, the "meta.config"
/// string array in JSON.
struct Preamble {
  std::vector<std::string> lines;
};

// Writers emit percentages with 4 decimals; NaN is an empty CSV field and
// null in JSON. Rows are written in sorted order. Text fields containing a
// comma, quote or newline throw std::invalid_argument.

void write_cells(std::ostream& out, std::vector<CellResult> cells, Format format,
                 const Preamble& preamble = {});
void write_report(std::ostream& out, const ExperimentReport& report, Format format,
                  const Preamble& preamble = {});
void write_sweep(std::ostream& out, std::vector<SweepPoint> points, Format format,
                 const Preamble& preamble = {});
void write_noise(std::ostream& out, std::vector<NoiseRow> rows, Format format,
                 const Preamble& preamble = {});
void write_synthetic(std::ostream& out, const std::vector<SyntheticPoint>& points, Format format,
                     const Preamble& preamble = {});

struct SignRow {
  LearnerKind learner = LearnerKind::tree;
  Method method = Method::bagging;
  Method baseline = Method::single;
  SignTestResult result;
};
/// Columns learner,method,baseline,wins,losses,ties,p_value (p with 6
/// significant digits).
void write_sign_tests(std::ostream& out, const std::vector<SignRow>& rows, Format format,
                      const Preamble& preamble = {});
/// One row per name: `name` then one 4-decimal column per name.
void write_correlation(std::ostream& out, const CorrelationMatrix& matrix, Format format,
                       const Preamble& preamble = {});

/// Reads a report in CSV or JSON. Only dataset, learner, method and
/// error_mean are required; absent numeric columns read as NaN.
/// Throws ConfigError naming the file and line on malformed input.
ExperimentReport read_report(std::istream& in, const std::string& source = "<input>");
ExperimentReport read_report(const std::filesystem::path& path);

/// Column name used by the correlation command, e.g. "bagging-tree".
std::string column_name(LearnerKind learner, Method method);

/// Ensemble/single error ratios per (learner, method) column over the
/// datasets where every column and its baseline exist. Columns are ordered
/// network before tree, then by method.
struct RatioTable {
  std::vector<std::string> datasets;
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};
RatioTable ratio_table(const ExperimentReport& report, Method baseline = Method::single);

/// Entry point of the ensbench executable. Returns the process exit status;
/// failures print one "ensbench: error: ..." line on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ensbench
