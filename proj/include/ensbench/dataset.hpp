#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ensbench {

/// Raised for malformed schema or data files and for invariant violations
/// when building datasets in memory.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FeatureKind { continuous, discrete };

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::continuous;
  std::vector<std::string> values;  // declared values, discrete only

  bool is_discrete() const { return kind == FeatureKind::discrete; }
};

class Schema {
 public:
  /// Throws DataError on duplicate feature names, discrete features with
  /// fewer than two distinct values, or fewer than two distinct classes.
  Schema(std::vector<Feature> features, std::vector<std::string> class_values);

  const std::vector<Feature>& features() const { return features_; }
  const Feature& feature(std::size_t i) const { return features_.at(i); }
  std::size_t feature_count() const { return features_.size(); }

  const std::vector<std::string>& class_values() const { return class_values_; }
  std::size_t class_count() const { return class_values_.size(); }

  std::optional<std::size_t> class_index(std::string_view label) const;
  std::optional<std::size_t> value_index(std::size_t feature, std::string_view value) const;

 private:
  std::vector<Feature> features_;
  std::vector<std::string> class_values_;
};

/// One cell of an example: a real number, the index of a declared discrete
/// value, or missing.
class FeatureValue {
 public:
  static FeatureValue real(double v) { return FeatureValue(Tag::real, v); }
  static FeatureValue token(std::size_t index) {
    return FeatureValue(Tag::token, static_cast<double>(index));
  }
  static FeatureValue missing() { return FeatureValue(Tag::missing, 0.0); }

  bool is_missing() const { return tag_ == Tag::missing; }
  bool is_real() const { return tag_ == Tag::real; }
  bool is_token() const { return tag_ == Tag::token; }

  double as_real() const { return value_; }
  std::size_t as_token() const { return static_cast<std::size_t>(value_); }

  friend bool operator==(const FeatureValue&, const FeatureValue&) = default;

 private:
  enum class Tag : std::uint8_t { real, token, missing };
  FeatureValue(Tag tag, double v) : value_(v), tag_(tag) {}

  double value_;
  Tag tag_;
};

struct Example {
  std::vector<FeatureValue> values;
  std::size_t label = 0;

  friend bool operator==(const Example&, const Example&) = default;
};

class Dataset {
 public:
  /// Validates that every example conforms to the schema and that there is
  /// at least one example.
  Dataset(std::string name, std::shared_ptr<const Schema> schema,
          std::vector<Example> examples,
          std::vector<std::size_t> imputed_counts = {});

  const std::string& name() const { return name_; }
  const Schema& schema() const { return *schema_; }
  const std::shared_ptr<const Schema>& shared_schema() const { return schema_; }

  std::size_t size() const { return examples_.size(); }
  const Example& example(std::size_t i) const { return examples_[i]; }
  const std::vector<Example>& examples() const { return examples_; }

  /// Per-feature count of cells filled in by load-time imputation.
  const std::vector<std::size_t>& imputed_counts() const { return imputed_counts_; }

  /// Copy of the selected rows, in the given order (duplicates allowed).
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::string name_;
  std::shared_ptr<const Schema> schema_;
  std::vector<Example> examples_;
  std::vector<std::size_t> imputed_counts_;
};

/// Line-oriented schema sidecar:
///   feature <name> continuous
///   feature <name> discrete v1|v2|...
///   class c1|c2|...            (last line)
Schema parse_schema(std::istream& in);
Schema load_schema(const std::filesystem::path& path);

/// Comma-separated rows, label last, "?" for missing cells. Missing values
/// are imputed (continuous: mean of observed values; discrete: modal value)
/// and the per-feature imputation count is recorded.
Dataset parse_dataset(std::istream& in, std::shared_ptr<const Schema> schema, std::string name);

/// Dataset name is the CSV file stem.
Dataset load_dataset(const std::filesystem::path& csv_path,
                     const std::filesystem::path& schema_path);

}  // namespace ensbench
