#include "ensbench/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

namespace ensbench {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::optional<double> parse_real(std::string_view s) {
  double v = 0.0;
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

std::vector<std::string> to_strings(const std::vector<std::string_view>& views) {
  return {views.begin(), views.end()};
}

std::string where(std::size_t row, std::size_t column, const std::string& name) {
  std::ostringstream os;
  os << "row " << row << ", column " << column << " (" << name << ")";
  return os.str();
}

}  // namespace

Schema::Schema(std::vector<Feature> features, std::vector<std::string> class_values)
    : features_(std::move(features)), class_values_(std::move(class_values)) {
  std::unordered_set<std::string> names;
  for (const auto& f : features_) {
    if (f.name.empty()) throw DataError("feature with empty name");
    if (!names.insert(f.name).second) throw DataError("duplicate feature name '" + f.name + "'");
    if (f.is_discrete()) {
      std::set<std::string> distinct(f.values.begin(), f.values.end());
      if (distinct.size() != f.values.size() || distinct.size() < 2) {
        throw DataError("discrete feature '" + f.name + "' needs at least two distinct values");
      }
    }
  }
  std::set<std::string> distinct(class_values_.begin(), class_values_.end());
  if (distinct.size() != class_values_.size() || distinct.size() < 2) {
    throw DataError("schema needs at least two distinct class labels");
  }
}

std::optional<std::size_t> Schema::class_index(std::string_view label) const {
  const auto it = std::find(class_values_.begin(), class_values_.end(), label);
  if (it == class_values_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - class_values_.begin());
}

std::optional<std::size_t> Schema::value_index(std::size_t feature, std::string_view value) const {
  const auto& values = features_.at(feature).values;
  const auto it = std::find(values.begin(), values.end(), value);
  if (it == values.end()) return std::nullopt;
  return static_cast<std::size_t>(it - values.begin());
}

Dataset::Dataset(std::string name, std::shared_ptr<const Schema> schema,
                 std::vector<Example> examples, std::vector<std::size_t> imputed_counts)
    : name_(std::move(name)),
      schema_(std::move(schema)),
      examples_(std::move(examples)),
      imputed_counts_(std::move(imputed_counts)) {
  if (!schema_) throw DataError("dataset without schema");
  if (examples_.empty()) throw DataError("empty dataset");
  const std::size_t width = schema_->feature_count();
  if (imputed_counts_.empty()) imputed_counts_.assign(width, 0);
  if (imputed_counts_.size() != width) throw DataError("imputation counts do not match schema");
  for (std::size_t i = 0; i < examples_.size(); ++i) {
    const auto& ex = examples_[i];
    if (ex.values.size() != width) {
      throw DataError("example " + std::to_string(i) + " has wrong number of values");
    }
    if (ex.label >= schema_->class_count()) {
      throw DataError("example " + std::to_string(i) + " has out-of-range label");
    }
    for (std::size_t j = 0; j < width; ++j) {
      const auto& v = ex.values[j];
      if (v.is_missing()) continue;
      const auto& f = schema_->feature(j);
      const bool ok = f.is_discrete() ? v.is_token() && v.as_token() < f.values.size()
                                      : v.is_real();
      if (!ok) {
        throw DataError("example " + std::to_string(i) + " does not conform at feature '" +
                        f.name + "'");
      }
    }
  }
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  std::vector<Example> picked;
  picked.reserve(rows.size());
  for (std::size_t r : rows) picked.push_back(examples_.at(r));
  return Dataset(name_, schema_, std::move(picked));
}

Schema parse_schema(std::istream& in) {
  std::vector<Feature> features;
  std::optional<std::vector<std::string>> classes;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (classes) {
      throw DataError("schema line " + std::to_string(line_no) + ": content after class line");
    }
    std::istringstream tokens{std::string(text)};
    std::string keyword;
    tokens >> keyword;
    if (keyword == "feature") {
      std::string name, kind, values;
      tokens >> name >> kind;
      std::getline(tokens, values);
      Feature f;
      f.name = name;
      if (kind == "continuous") {
        f.kind = FeatureKind::continuous;
      } else if (kind == "discrete") {
        f.kind = FeatureKind::discrete;
        f.values = to_strings(split(trim(values), '|'));
      } else {
        throw DataError("schema line " + std::to_string(line_no) + ": unknown feature kind '" +
                        kind + "'");
      }
      features.push_back(std::move(f));
    } else if (keyword == "class") {
      std::string values;
      std::getline(tokens, values);
      classes = to_strings(split(trim(values), '|'));
    } else {
      throw DataError("schema line " + std::to_string(line_no) + ": expected 'feature' or 'class'");
    }
  }
  if (!classes) throw DataError("schema has no class line");
  try {
    return Schema(std::move(features), std::move(*classes));
  } catch (const DataError& e) {
    throw DataError(std::string("invalid schema: ") + e.what());
  }
}

Schema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open schema file " + path.string());
  return parse_schema(in);
}

Dataset parse_dataset(std::istream& in, std::shared_ptr<const Schema> schema, std::string name) {
  const Schema& s = *schema;
  const std::size_t width = s.feature_count();
  std::vector<Example> examples;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != width + 1) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(width + 1) +
                      " cells, found " + std::to_string(cells.size()));
    }
    Example ex;
    ex.values.reserve(width);
    for (std::size_t j = 0; j < width; ++j) {
      const auto cell = cells[j];
      const auto& f = s.feature(j);
      if (cell == "?") {
        ex.values.push_back(FeatureValue::missing());
      } else if (f.is_discrete()) {
        const auto idx = s.value_index(j, cell);
        if (!idx) {
          throw DataError(where(row, j + 1, f.name) + ": undeclared value '" + std::string(cell) + "'");
        }
        ex.values.push_back(FeatureValue::token(*idx));
      } else {
        const auto v = parse_real(cell);
        if (!v) {
          throw DataError(where(row, j + 1, f.name) + ": not a number '" + std::string(cell) + "'");
        }
        ex.values.push_back(FeatureValue::real(*v));
      }
    }
    const auto label = s.class_index(cells[width]);
    if (!label) {
      throw DataError(where(row, width + 1, "class") + ": unknown class label '" +
                      std::string(cells[width]) + "'");
    }
    ex.label = *label;
    examples.push_back(std::move(ex));
  }
  if (examples.empty()) throw DataError("empty dataset");

  // Impute: mean for continuous, mode (lowest index on ties) for discrete.
  std::vector<std::size_t> imputed(width, 0);
  for (std::size_t j = 0; j < width; ++j) {
    const auto& f = s.feature(j);
    double sum = 0.0;
    std::size_t observed = 0;
    std::vector<std::size_t> freq(f.values.size(), 0);
    for (const auto& ex : examples) {
      const auto& v = ex.values[j];
      if (v.is_missing()) continue;
      ++observed;
      if (f.is_discrete()) ++freq[v.as_token()];
      else sum += v.as_real();
    }
    if (observed == examples.size()) continue;
    FeatureValue fill = FeatureValue::real(observed ? sum / static_cast<double>(observed) : 0.0);
    if (f.is_discrete()) {
      fill = FeatureValue::token(static_cast<std::size_t>(
          std::max_element(freq.begin(), freq.end()) - freq.begin()));
    }
    for (auto& ex : examples) {
      if (ex.values[j].is_missing()) {
        ex.values[j] = fill;
        ++imputed[j];
      }
    }
  }
  return Dataset(std::move(name), std::move(schema), std::move(examples), std::move(imputed));
}

Dataset load_dataset(const std::filesystem::path& csv_path, const std::filesystem::path& schema_path) {
  auto schema = std::make_shared<const Schema>(load_schema(schema_path));
  std::ifstream in(csv_path);
  if (!in) throw DataError("cannot open data file " + csv_path.string());
  return parse_dataset(in, std::move(schema), csv_path.stem().string());
}

}  // namespace ensbench
