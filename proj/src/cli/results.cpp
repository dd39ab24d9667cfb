#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>
#include <tuple>

#include "ensbench/cli.hpp"

namespace ensbench {
namespace {

using nlohmann::ordered_json;

struct Field {
  std::string csv;
  ordered_json json;
};

Field text(std::string_view s) {
  if (s.find_first_of(",\"\n\r") != std::string_view::npos) {
    throw std::invalid_argument("field '" + std::string(s) + "' contains a separator");
  }
  return {std::string(s), std::string(s)};
}

Field count(std::size_t n) { return {std::to_string(n), n}; }

// Percentages and other reals share the 4-decimal format.
Field fixed4(double v) {
  if (std::isnan(v)) return {"", nullptr};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  if (std::string_view(buf) == "-0.0000") return {"0.0000", 0.0};
  return {buf, std::round(v * 1e4) / 1e4};
}

Field general(double v) {
  if (std::isnan(v)) return {"", nullptr};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return {buf, v};
}

void write_table(std::ostream& out, Format format, const Preamble& preamble,
                 const std::vector<std::string>& header, const std::vector<std::vector<Field>>& rows) {
  if (format == Format::csv) {
    for (const auto& line : preamble.lines) out << "# " << line << '\n';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i].csv;
      out << '\n';
    }
  } else {
    ordered_json doc;
    doc["meta"] = ordered_json::object();
    doc["meta"]["config"] = preamble.lines;
    doc["rows"] = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json obj = ordered_json::object();
      for (std::size_t i = 0; i < row.size(); ++i) obj[header[i]] = row[i].json;
      doc["rows"].push_back(std::move(obj));
    }
    out << doc.dump(2) << '\n';
  }
  if (!out) throw std::runtime_error("write failed");
}

[[noreturn]] void bad_input(const std::string& source, std::size_t line, const std::string& msg) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

double parse_real(const std::string& source, std::size_t line, std::string_view s) {
  if (s.empty()) return kNoValue;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    bad_input(source, line, "malformed number '" + std::string(s) + "'");
  }
  return v;
}

ReportRow make_row(const std::string& source, std::size_t line, const std::string& dataset,
                   std::string_view learner, std::string_view method) {
  ReportRow row;
  row.dataset = dataset;
  const auto l = parse_learner(learner);
  if (!l) bad_input(source, line, "unknown learner '" + std::string(learner) + "'");
  const auto m = parse_method(method);
  if (!m) bad_input(source, line, "unknown method '" + std::string(method) + "'");
  row.learner = *l;
  row.method = *m;
  return row;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

ExperimentReport read_csv_report(std::istream& in, const std::string& source) {
  ExperimentReport report;
  std::vector<std::string> header;
  std::map<std::string, std::size_t> col;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_csv(line);
    if (header.empty()) {
      header = fields;
      for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
      for (const char* need : {"dataset", "learner", "method", "error_mean"}) {
        if (!col.count(need)) bad_input(source, line_no, std::string("missing column ") + need);
      }
      continue;
    }
    if (fields.size() != header.size()) {
      bad_input(source, line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                     std::to_string(fields.size()));
    }
    ReportRow row = make_row(source, line_no, fields[col["dataset"]], fields[col["learner"]],
                             fields[col["method"]]);
    auto real = [&](const char* name) {
      const auto it = col.find(name);
      return it == col.end() ? kNoValue : parse_real(source, line_no, fields[it->second]);
    };
    row.error_mean = real("error_mean");
    row.error_sd = real("error_sd");
    row.best_single = real("best_single");
    row.pct_reduction = real("pct_reduction");
    row.ratio = real("ratio");
    report.rows.push_back(std::move(row));
  }
  if (header.empty()) throw ConfigError(source + ": no header line");
  return report;
}

ExperimentReport read_json_report(std::istream& in, const std::string& source) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
  if (!doc.contains("rows") || !doc["rows"].is_array()) throw ConfigError(source + ": no rows array");
  ExperimentReport report;
  std::size_t index = 0;
  for (const auto& obj : doc["rows"]) {
    ++index;
    try {
      ReportRow row = make_row(source, index, obj.at("dataset").get<std::string>(),
                               obj.at("learner").get<std::string>(),
                               obj.at("method").get<std::string>());
      auto real = [&](const char* name) {
        return obj.contains(name) && !obj[name].is_null() ? obj[name].get<double>() : kNoValue;
      };
      if (!obj.contains("error_mean")) bad_input(source, index, "missing error_mean");
      row.error_mean = real("error_mean");
      row.error_sd = real("error_sd");
      row.best_single = real("best_single");
      row.pct_reduction = real("pct_reduction");
      row.ratio = real("ratio");
      report.rows.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      bad_input(source, index, e.what());
    }
  }
  return report;
}

}  // namespace

std::optional<Format> parse_format(std::string_view s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  return std::nullopt;
}

void write_cells(std::ostream& out, std::vector<CellResult> cells, Format format,
                 const Preamble& preamble) {
  std::sort(cells.begin(), cells.end(), cell_less);
  std::vector<std::vector<Field>> rows;
  for (const auto& c : cells) {
    rows.push_back({text(c.dataset), text(to_string(c.learner)), text(to_string(c.method)),
                    count(c.members), count(c.run), count(c.fold), fixed4(100.0 * c.error())});
  }
  write_table(out, format, preamble,
              {"dataset", "learner", "method", "members", "run", "fold", "error"}, rows);
}

void write_report(std::ostream& out, const ExperimentReport& report, Format format,
                  const Preamble& preamble) {
  auto sorted = report.rows;
  std::sort(sorted.begin(), sorted.end(), [](const ReportRow& a, const ReportRow& b) {
    return std::tie(a.dataset, a.learner, a.method) < std::tie(b.dataset, b.learner, b.method);
  });
  std::vector<std::vector<Field>> rows;
  for (const auto& r : sorted) {
    rows.push_back({text(r.dataset), text(to_string(r.learner)), text(to_string(r.method)),
                    fixed4(r.error_mean), fixed4(r.error_sd), fixed4(r.best_single),
                    fixed4(r.pct_reduction), fixed4(r.ratio)});
  }
  write_table(out, format, preamble,
              {"dataset", "learner", "method", "error_mean", "error_sd", "best_single",
               "pct_reduction", "ratio"},
              rows);
}

void write_sweep(std::ostream& out, std::vector<SweepPoint> points, Format format,
                 const Preamble& preamble) {
  std::sort(points.begin(), points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return std::tie(a.dataset, a.learner, a.method, a.members) <
           std::tie(b.dataset, b.learner, b.method, b.members);
  });
  std::vector<std::vector<Field>> rows;
  for (const auto& p : points) {
    rows.push_back({text(p.dataset), text(to_string(p.learner)), text(to_string(p.method)),
                    count(p.members), fixed4(p.error_mean)});
  }
  write_table(out, format, preamble, {"dataset", "learner", "method", "members", "error_mean"}, rows);
}

void write_noise(std::ostream& out, std::vector<NoiseRow> noise, Format format,
                 const Preamble& preamble) {
  std::sort(noise.begin(), noise.end(), [](const NoiseRow& a, const NoiseRow& b) {
    return std::tie(a.dataset, a.level, a.method) < std::tie(b.dataset, b.level, b.method);
  });
  std::vector<std::vector<Field>> rows;
  for (const auto& r : noise) {
    rows.push_back({text(r.dataset), fixed4(100.0 * r.level), text(to_string(r.method)),
                    count(r.replicas), fixed4(r.error_mean), fixed4(r.reduction)});
  }
  write_table(out, format, preamble,
              {"dataset", "noise", "method", "replicas", "error_mean", "reduction"}, rows);
}

void write_synthetic(std::ostream& out, const std::vector<SyntheticPoint>& points, Format format,
                     const Preamble& preamble) {
  auto sorted = points;
  std::sort(sorted.begin(), sorted.end(), [](const SyntheticPoint& a, const SyntheticPoint& b) {
    return std::tie(a.dataset, a.method, a.members) < std::tie(b.dataset, b.method, b.members);
  });
  std::vector<std::vector<Field>> rows;
  for (const auto& p : sorted) {
    rows.push_back({text(p.dataset), text(to_string(p.method)), count(p.members), fixed4(p.error)});
  }
  write_table(out, format, preamble, {"dataset", "method", "members", "error"}, rows);
}

void write_sign_tests(std::ostream& out, const std::vector<SignRow>& signs, Format format,
                      const Preamble& preamble) {
  std::vector<std::vector<Field>> rows;
  for (const auto& s : signs) {
    rows.push_back({text(to_string(s.learner)), text(to_string(s.method)),
                    text(to_string(s.baseline)), count(s.result.wins), count(s.result.losses),
                    count(s.result.ties), general(s.result.p_value)});
  }
  write_table(out, format, preamble,
              {"learner", "method", "baseline", "wins", "losses", "ties", "p_value"}, rows);
}

void write_correlation(std::ostream& out, const CorrelationMatrix& matrix, Format format,
                       const Preamble& preamble) {
  std::vector<std::string> header{"name"};
  header.insert(header.end(), matrix.names.begin(), matrix.names.end());
  std::vector<std::vector<Field>> rows;
  for (std::size_t i = 0; i < matrix.names.size(); ++i) {
    std::vector<Field> row{text(matrix.names[i])};
    for (double v : matrix.values[i]) row.push_back(fixed4(v));
    rows.push_back(std::move(row));
  }
  write_table(out, format, preamble, header, rows);
}

ExperimentReport read_report(std::istream& in, const std::string& source) {
  in >> std::ws;
  if (in.peek() == '{') return read_json_report(in, source);
  return read_csv_report(in, source);
}

ExperimentReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read results " + path.string());
  return read_report(in, path.string());
}

std::string column_name(LearnerKind learner, Method method) {
  return std::string(to_string(method)) + "-" + std::string(to_string(learner));
}

RatioTable ratio_table(const ExperimentReport& report, Method baseline) {
  std::map<std::tuple<LearnerKind, Method>, std::map<std::string, double>> errors;
  for (const auto& r : report.rows) errors[{r.learner, r.method}][r.dataset] = r.error_mean;

  RatioTable table;
  std::vector<std::tuple<LearnerKind, Method>> keys;
  for (LearnerKind learner : {LearnerKind::network, LearnerKind::tree}) {
    if (!errors.count({learner, baseline})) continue;
    for (Method m : {Method::single, Method::simple, Method::bagging, Method::arcing, Method::ada}) {
      if (m != baseline && errors.count({learner, m})) keys.emplace_back(learner, m);
    }
  }
  if (keys.empty()) throw ConfigError("no ensemble columns with a baseline");

  std::set<std::string> candidates;
  for (const auto& [dataset, e] : errors[keys.front()]) candidates.insert(dataset);
  for (const auto& dataset : candidates) {
    bool complete = true;
    for (const auto& [learner, m] : keys) {
      complete = complete && errors[{learner, m}].count(dataset) &&
                 errors[{learner, baseline}].count(dataset);
    }
    if (complete) table.datasets.push_back(dataset);
  }
  for (const auto& [learner, m] : keys) {
    table.names.push_back(column_name(learner, m));
    std::vector<double> column;
    for (const auto& dataset : table.datasets) {
      const double base = errors[{learner, baseline}][dataset];
      if (!(base > 0.0)) {
        throw ConfigError("baseline error of " + column_name(learner, baseline) + " on " + dataset +
                          " is not positive");
      }
      column.push_back(errors[{learner, m}][dataset] / base);
    }
    table.columns.push_back(std::move(column));
  }
  return table;
}

}  // namespace ensbench
