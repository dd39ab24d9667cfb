#include <charconv>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ensbench/cli.hpp"

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
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return parts;
    start = pos + 1;
  }
}

[[noreturn]] void fail(std::size_t line, const std::string& message) {
  throw ConfigError("line " + std::to_string(line) + ": " + message);
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

std::uint64_t parse_u64(std::size_t line, std::string_view key, std::string_view text) {
  const auto v = parse_number<std::uint64_t>(text);
  if (!v) fail(line, "malformed " + std::string(key) + " '" + std::string(text) + "'");
  return *v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

NetworkConfig parse_network(std::size_t line, std::string_view value) {
  NetworkConfig nc;
  std::set<std::string_view> seen;
  for (std::string_view part : split(value, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string_view::npos) fail(line, "expected name=value in '" + std::string(part) + "'");
    const std::string_view name = trim(part.substr(0, eq));
    const std::string_view text = trim(part.substr(eq + 1));
    if (!seen.insert(name).second) fail(line, "repeated network field '" + std::string(name) + "'");
    if (name == "hidden") {
      nc.hidden_units = parse_u64(line, name, text);
    } else if (name == "epochs") {
      nc.epochs = parse_u64(line, name, text);
    } else if (name == "learning_rate" || name == "momentum" || name == "init_range") {
      const auto v = parse_number<double>(text);
      if (!v) fail(line, "malformed " + std::string(name) + " '" + std::string(text) + "'");
      (name == "learning_rate" ? nc.learning_rate
       : name == "momentum"    ? nc.momentum
                               : nc.init_half_range) = *v;
    } else {
      fail(line, "unknown network field '" + std::string(name) + "'");
    }
  }
  if (!seen.count("hidden") || !seen.count("epochs")) fail(line, "network needs hidden and epochs");
  try {
    nc.validate();
  } catch (const std::exception& e) {
    fail(line, e.what());
  }
  return nc;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  ExperimentConfig config;
  std::set<std::string> seen_keys;
  std::set<std::string> dataset_names;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (value.empty()) fail(line_no, "empty value for '" + key + "'");
    if (key != "dataset" && !seen_keys.insert(key).second) fail(line_no, "duplicate key '" + key + "'");

    if (key == "master_seed") {
      config.master_seed = parse_u64(line_no, key, value);
    } else if (key == "members") {
      config.members = parse_u64(line_no, key, value);
    } else if (key == "cv_runs") {
      config.cv_runs = parse_u64(line_no, key, value);
    } else if (key == "cv_folds") {
      config.cv_folds = parse_u64(line_no, key, value);
    } else if (key == "dataset") {
      const auto parts = split(value, ',');
      if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty()) {
        fail(line_no, "dataset expects name,csv,schema");
      }
      const std::string name(parts[0]);
      if (!dataset_names.insert(name).second) fail(line_no, "duplicate dataset '" + name + "'");
      auto resolve = [&](std::string_view p) {
        const std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
      };
      config.datasets.push_back({name, resolve(parts[1]), resolve(parts[2])});
    } else if (key == "learners") {
      config.learners.clear();
      for (std::string_view part : split(value, ',')) {
        const auto kind = parse_learner(part);
        if (!kind) fail(line_no, "unknown learner '" + std::string(part) + "'");
        config.learners.push_back(*kind);
      }
    } else if (key == "methods") {
      config.methods.clear();
      for (std::string_view part : split(value, ',')) {
        const auto method = parse_method(part);
        if (!method) fail(line_no, "unknown method '" + std::string(part) + "'");
        config.methods.push_back(*method);
      }
    } else if (key.rfind("network.", 0) == 0 && key.size() > 8) {
      config.network_overrides[key.substr(8)] = parse_network(line_no, value);
    } else {
      fail(line_no, "unknown key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config_text(buf.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void apply_seed_override(ExperimentConfig& config, const char* env_value) {
  if (env_value == nullptr) return;
  const auto v = parse_number<std::uint64_t>(trim(env_value));
  if (!v) throw ConfigError("ENSBENCH_SEED is not an unsigned integer: '" + std::string(env_value) + "'");
  config.master_seed = *v;
}

std::vector<std::string> config_lines(const ExperimentConfig& config) {
  auto join = [](const auto& items) {
    std::string s;
    for (const auto& item : items) s += (s.empty() ? "" : ",") + std::string(to_string(item));
    return s;
  };
  std::vector<std::string> lines{
      "master_seed = " + std::to_string(config.master_seed),
      "learners = " + join(config.learners),
      "methods = " + join(config.methods),
      "members = " + std::to_string(config.members),
      "cv_runs = " + std::to_string(config.cv_runs),
      "cv_folds = " + std::to_string(config.cv_folds),
  };
  for (const auto& d : config.datasets) {
    lines.push_back("dataset = " + d.name + "," + d.csv.string() + "," + d.schema.string());
  }
  for (const auto& [name, nc] : config.network_overrides) {
    lines.push_back("network." + name + " = hidden=" + std::to_string(nc.hidden_units) +
                    ",epochs=" + std::to_string(nc.epochs) +
                    ",learning_rate=" + format_double(nc.learning_rate) +
                    ",momentum=" + format_double(nc.momentum) +
                    ",init_range=" + format_double(nc.init_half_range));
  }
  return lines;
}

}  // namespace ensbench
