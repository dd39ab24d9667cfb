#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ensbench/dataset.hpp"

namespace ensbench {

/// Index of the largest score; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

/// A trained model. Immutable and safe to share across threads.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::size_t class_count() const = 0;
  /// One score in [0,1] per class.
  virtual std::vector<double> predict(const Example& example) const = 0;
  /// Line-oriented text dump (debugging and golden tests).
  virtual void dump(std::ostream& out) const = 0;

  std::size_t classify(const Example& example) const { return argmax(predict(example)); }
};

enum class LearnerKind { tree, network };

std::string_view to_string(LearnerKind kind);
std::optional<LearnerKind> parse_learner(std::string_view text);

/// Trains a classifier on a multiset of rows of a training set. `train` is
/// the whole training fold; learners that need global statistics (input
/// normalization) take them from all of its rows, not only from `rows`.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual LearnerKind kind() const = 0;
  virtual std::shared_ptr<const Classifier> fit(const Dataset& train,
                                                std::span<const std::size_t> rows,
                                                std::uint64_t seed) const = 0;
};

}  // namespace ensbench
