#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ensbench/dataset.hpp"

namespace ensbench {

struct FeatureRange {
  double min = 0.0;
  double max = 0.0;
};

/// Min/max of every continuous feature over a reference subset (the
/// training fold). Entries for discrete features are unused.
class NormalizationStats {
 public:
  NormalizationStats() = default;
  explicit NormalizationStats(std::vector<FeatureRange> ranges) : ranges_(std::move(ranges)) {}

  static NormalizationStats from(const Dataset& data);
  static NormalizationStats from(const Dataset& data, std::span<const std::size_t> rows);

  const std::vector<FeatureRange>& ranges() const { return ranges_; }

 private:
  std::vector<FeatureRange> ranges_;
};

/// Maps raw examples to network inputs in [0,1] and labels to 0/1 targets.
///
/// Continuous features are min-max scaled and clamped (0.5 when min == max).
/// A two-valued discrete feature takes one input, a k-valued one (k >= 3)
/// takes k one-hot inputs. A binary class is a single target unit; k >= 3
/// classes use one unit per class.
class Encoder {
 public:
  Encoder(std::shared_ptr<const Schema> schema, NormalizationStats stats);

  std::size_t input_width() const { return input_width_; }
  std::size_t target_width() const { return target_width_; }
  const Schema& schema() const { return *schema_; }
  const NormalizationStats& stats() const { return stats_; }

  void encode_inputs(const Example& ex, std::span<double> out) const;
  void encode_target(std::size_t label, std::span<double> out) const;

 private:
  std::shared_ptr<const Schema> schema_;
  NormalizationStats stats_;
  std::size_t input_width_ = 0;
  std::size_t target_width_ = 0;
};

std::size_t encoded_input_width(const Schema& schema);
std::size_t encoded_target_width(const Schema& schema);

/// Dense row-major block of encoded examples.
class EncodedSet {
 public:
  EncodedSet(std::size_t input_width, std::size_t target_width)
      : input_width_(input_width), target_width_(target_width) {}

  std::size_t size() const { return labels_.size(); }
  std::size_t input_width() const { return input_width_; }
  std::size_t target_width() const { return target_width_; }

  std::span<const double> inputs(std::size_t i) const {
    return {inputs_.data() + i * input_width_, input_width_};
  }
  std::span<const double> target(std::size_t i) const {
    return {targets_.data() + i * target_width_, target_width_};
  }
  std::size_t label(std::size_t i) const { return labels_[i]; }

  /// Appends one example; spans must match the declared widths.
  void push_back(std::span<const double> inputs, std::span<const double> target, std::size_t label);

 private:
  std::size_t input_width_;
  std::size_t target_width_;
  std::vector<double> inputs_;
  std::vector<double> targets_;
  std::vector<std::size_t> labels_;
};

EncodedSet encode(const Dataset& data, const Encoder& encoder);
EncodedSet encode(const Dataset& data, const NormalizationStats& stats);

}  // namespace ensbench
