#include "ensbench/encoding.hpp"

#include <algorithm>
#include <limits>

namespace ensbench {

NormalizationStats NormalizationStats::from(const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return from(data, all);
}

NormalizationStats NormalizationStats::from(const Dataset& data, std::span<const std::size_t> rows) {
  const std::size_t width = data.schema().feature_count();
  std::vector<FeatureRange> ranges(width, FeatureRange{std::numeric_limits<double>::infinity(),
                                                       -std::numeric_limits<double>::infinity()});
  for (std::size_t r : rows) {
    const auto& ex = data.example(r);
    for (std::size_t j = 0; j < width; ++j) {
      if (!ex.values[j].is_real()) continue;
      const double v = ex.values[j].as_real();
      ranges[j].min = std::min(ranges[j].min, v);
      ranges[j].max = std::max(ranges[j].max, v);
    }
  }
  for (auto& r : ranges) {
    if (r.min > r.max) r = FeatureRange{0.0, 0.0};
  }
  return NormalizationStats(std::move(ranges));
}

std::size_t encoded_input_width(const Schema& schema) {
  std::size_t width = 0;
  for (const auto& f : schema.features()) {
    width += (f.is_discrete() && f.values.size() >= 3) ? f.values.size() : 1;
  }
  return width;
}

std::size_t encoded_target_width(const Schema& schema) {
  return schema.class_count() == 2 ? 1 : schema.class_count();
}

Encoder::Encoder(std::shared_ptr<const Schema> schema, NormalizationStats stats)
    : schema_(std::move(schema)), stats_(std::move(stats)) {
  if (stats_.ranges().size() != schema_->feature_count()) {
    throw DataError("normalization stats do not cover the schema");
  }
  input_width_ = encoded_input_width(*schema_);
  target_width_ = encoded_target_width(*schema_);
}

void Encoder::encode_inputs(const Example& ex, std::span<double> out) const {
  std::size_t k = 0;
  for (std::size_t j = 0; j < schema_->feature_count(); ++j) {
    const auto& f = schema_->feature(j);
    const auto& v = ex.values[j];
    if (!f.is_discrete()) {
      const auto& range = stats_.ranges()[j];
      double x = 0.5;
      if (range.max > range.min && v.is_real()) {
        x = std::clamp((v.as_real() - range.min) / (range.max - range.min), 0.0, 1.0);
      }
      out[k++] = x;
    } else if (f.values.size() == 2) {
      out[k++] = (v.is_token() && v.as_token() == 1) ? 1.0 : 0.0;
    } else {
      for (std::size_t c = 0; c < f.values.size(); ++c) {
        out[k + c] = (v.is_token() && v.as_token() == c) ? 1.0 : 0.0;
      }
      k += f.values.size();
    }
  }
}

void Encoder::encode_target(std::size_t label, std::span<double> out) const {
  if (target_width_ == 1) {
    out[0] = label == 1 ? 1.0 : 0.0;
    return;
  }
  for (std::size_t c = 0; c < target_width_; ++c) out[c] = c == label ? 1.0 : 0.0;
}

void EncodedSet::push_back(std::span<const double> inputs, std::span<const double> target,
                           std::size_t label) {
  if (inputs.size() != input_width_ || target.size() != target_width_) {
    throw DataError("encoded example width mismatch");
  }
  inputs_.insert(inputs_.end(), inputs.begin(), inputs.end());
  targets_.insert(targets_.end(), target.begin(), target.end());
  labels_.push_back(label);
}

EncodedSet encode(const Dataset& data, const Encoder& encoder) {
  EncodedSet set(encoder.input_width(), encoder.target_width());
  std::vector<double> in(encoder.input_width()), out(encoder.target_width());
  for (const auto& ex : data.examples()) {
    encoder.encode_inputs(ex, in);
    encoder.encode_target(ex.label, out);
    set.push_back(in, out, ex.label);
  }
  return set;
}

EncodedSet encode(const Dataset& data, const NormalizationStats& stats) {
  return encode(data, Encoder(data.shared_schema(), stats));
}

}  // namespace ensbench
