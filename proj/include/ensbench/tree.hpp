#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ensbench/classifier.hpp"
#include "ensbench/dataset.hpp"

namespace ensbench {

struct TreeOptions {
  /// Nodes with fewer examples become leaves.
  std::size_t min_split = 4;
  /// A split is admissible only if at least two branches hold this many.
  std::size_t min_branch = 2;
  /// Confidence factor of the pessimistic error bound used when pruning.
  double confidence = 0.25;
  bool prune = true;
};

struct TreeNode {
  /// Training examples (with multiplicity) that reached this node, by class.
  std::vector<std::size_t> class_counts;
  std::size_t majority = 0;

  /// Split feature; empty for leaves.
  std::optional<std::size_t> feature;
  /// Continuous splits send value <= threshold to children[0], else children[1].
  double threshold = 0.0;
  /// Discrete splits keep one slot per declared value; a null slot is a
  /// value no training example carried.
  std::vector<std::unique_ptr<TreeNode>> children;

  bool is_leaf() const { return children.empty(); }
  std::size_t total() const;
  std::size_t errors() const { return total() - class_counts[majority]; }
  /// Index of the non-null child with the largest training count.
  std::size_t heaviest_child() const;
};

struct SplitScore {
  double gain = 0.0;        // bits
  double split_info = 0.0;  // bits
  double gain_ratio = 0.0;  // 0 when split_info is 0
};

double entropy_bits(std::span<const std::size_t> counts);
SplitScore score_split(const std::vector<std::vector<std::size_t>>& counts_by_branch);
double gain_ratio(const std::vector<std::vector<std::size_t>>& counts_by_branch);

/// Upper limit p of the one-sided binomial confidence interval: the p for
/// which observing at most `errors` mistakes in `n` trials has probability
/// `confidence`.
double pessimistic_error_rate(std::size_t errors, std::size_t n, double confidence);

/// Sum over the leaves of n * pessimistic_error_rate(errors, n).
double estimated_errors(const TreeNode& node, double confidence);

/// Bottom-up subtree replacement: an internal node becomes a leaf when its
/// own pessimistic estimate is no worse than its subtree's.
void prune_tree(TreeNode& root, double confidence);

class TreeClassifier : public Classifier {
 public:
  TreeClassifier(std::shared_ptr<const Schema> schema, std::unique_ptr<TreeNode> root);

  std::size_t class_count() const override { return schema_->class_count(); }
  std::vector<double> predict(const Example& example) const override;
  void dump(std::ostream& out) const override;

  const TreeNode& root() const { return *root_; }
  std::size_t leaf_count() const;
  std::size_t depth() const;

 private:
  std::shared_ptr<const Schema> schema_;
  std::unique_ptr<TreeNode> root_;
};

/// Unpruned tree grown by recursive gain-ratio partitioning.
std::unique_ptr<TreeNode> grow_tree(const Dataset& train, std::span<const std::size_t> rows,
                                    const TreeOptions& options);

/// Throws std::invalid_argument on an empty row set.
TreeClassifier train_tree(const Dataset& train, std::span<const std::size_t> rows,
                          const TreeOptions& options = {});
TreeClassifier train_tree(const Dataset& train, const TreeOptions& options = {});

class TreeLearner : public Learner {
 public:
  explicit TreeLearner(TreeOptions options = {}) : options_(options) {}

  LearnerKind kind() const override { return LearnerKind::tree; }
  std::shared_ptr<const Classifier> fit(const Dataset& train, std::span<const std::size_t> rows,
                                        std::uint64_t seed) const override;

 private:
  TreeOptions options_;
};

}  // namespace ensbench
