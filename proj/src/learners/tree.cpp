#include "ensbench/tree.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include <boost/math/special_functions/beta.hpp>

namespace ensbench {
namespace {

constexpr double kGainEpsilon = 1e-12;

double entropy_of(std::span<const std::size_t> counts, double total) {
  double h = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::size_t majority_of(std::span<const std::size_t> counts) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < counts.size(); ++i) {
    if (counts[i] > counts[best]) best = i;
  }
  return best;
}

struct Candidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  SplitScore score;
};

class Grower {
 public:
  Grower(const Dataset& data, const TreeOptions& options)
      : data_(data), options_(options), classes_(data.schema().class_count()) {}

  std::unique_ptr<TreeNode> grow(std::vector<std::size_t> rows) {
    auto node = std::make_unique<TreeNode>();
    node->class_counts.assign(classes_, 0);
    for (std::size_t r : rows) ++node->class_counts[data_.example(r).label];
    node->majority = majority_of(node->class_counts);
    if (node->class_counts[node->majority] == rows.size() || rows.size() < options_.min_split) {
      return node;
    }

    auto best = choose_split(rows, node->class_counts);
    if (!best) return node;

    node->feature = best->feature;
    const Feature& f = data_.schema().feature(best->feature);
    if (f.is_discrete()) {
      std::vector<std::vector<std::size_t>> parts(f.values.size());
      for (std::size_t r : rows) parts[data_.example(r).values[best->feature].as_token()].push_back(r);
      rows = {};
      node->children.resize(parts.size());
      for (std::size_t v = 0; v < parts.size(); ++v) {
        if (!parts[v].empty()) node->children[v] = grow(std::move(parts[v]));
      }
    } else {
      node->threshold = best->threshold;
      std::vector<std::size_t> left, right;
      for (std::size_t r : rows) {
        (data_.example(r).values[best->feature].as_real() <= best->threshold ? left : right)
            .push_back(r);
      }
      rows = {};
      node->children.resize(2);
      node->children[0] = grow(std::move(left));
      node->children[1] = grow(std::move(right));
    }
    return node;
  }

 private:
  // Gain-ratio selection restricted to candidates whose gain is at least the
  // average gain of all admissible candidates with positive gain.
  std::optional<Candidate> choose_split(const std::vector<std::size_t>& rows,
                                        const std::vector<std::size_t>& parent) {
    std::vector<Candidate> candidates;
    for (std::size_t j = 0; j < data_.schema().feature_count(); ++j) {
      auto c = data_.schema().feature(j).is_discrete() ? discrete_candidate(j, rows)
                                                        : continuous_candidate(j, rows, parent);
      if (c && c->score.gain > kGainEpsilon) candidates.push_back(*c);
    }
    if (candidates.empty()) return std::nullopt;
    double mean_gain = 0.0;
    for (const auto& c : candidates) mean_gain += c.score.gain;
    mean_gain /= static_cast<double>(candidates.size());

    const Candidate* best = nullptr;
    for (const auto& c : candidates) {
      if (c.score.gain < mean_gain - kGainEpsilon) continue;
      if (!best || c.score.gain_ratio > best->score.gain_ratio) best = &c;
    }
    return *best;
  }

  bool admissible(const std::vector<std::vector<std::size_t>>& branches) const {
    std::size_t big = 0;
    for (const auto& b : branches) {
      std::size_t n = 0;
      for (std::size_t c : b) n += c;
      if (n >= options_.min_branch) ++big;
    }
    return big >= 2;
  }

  std::optional<Candidate> discrete_candidate(std::size_t j, const std::vector<std::size_t>& rows) {
    const std::size_t k = data_.schema().feature(j).values.size();
    std::vector<std::vector<std::size_t>> branches(k, std::vector<std::size_t>(classes_, 0));
    for (std::size_t r : rows) {
      const Example& ex = data_.example(r);
      ++branches[ex.values[j].as_token()][ex.label];
    }
    if (!admissible(branches)) return std::nullopt;
    return Candidate{j, 0.0, score_split(branches)};
  }

  // Threshold chosen by information gain over midpoints between adjacent
  // distinct values; the gain ratio is then taken at that threshold.
  std::optional<Candidate> continuous_candidate(std::size_t j, const std::vector<std::size_t>& rows,
                                                const std::vector<std::size_t>& parent) {
    sorted_.clear();
    for (std::size_t r : rows) {
      const Example& ex = data_.example(r);
      sorted_.emplace_back(ex.values[j].as_real(), ex.label);
    }
    std::sort(sorted_.begin(), sorted_.end());
    const std::size_t n = sorted_.size();
    const double total = static_cast<double>(n);
    const double parent_entropy = entropy_of(parent, total);

    std::vector<std::size_t> left(classes_, 0);
    std::vector<std::size_t> right = parent;
    double best_gain = -1.0;
    std::size_t best_cut = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      ++left[sorted_[i].second];
      --right[sorted_[i].second];
      if (!(sorted_[i].first < sorted_[i + 1].first)) continue;
      const std::size_t nl = i + 1;
      const std::size_t nr = n - nl;
      if (nl < options_.min_branch || nr < options_.min_branch) continue;
      const double dl = static_cast<double>(nl);
      const double dr = static_cast<double>(nr);
      const double gain =
          parent_entropy - (dl / total) * entropy_of(left, dl) - (dr / total) * entropy_of(right, dr);
      if (gain > best_gain + kGainEpsilon) {
        best_gain = gain;
        best_cut = i;
      }
    }
    if (best_gain < 0.0) return std::nullopt;

    const double threshold = 0.5 * (sorted_[best_cut].first + sorted_[best_cut + 1].first);
    std::vector<std::vector<std::size_t>> branches(2, std::vector<std::size_t>(classes_, 0));
    for (std::size_t i = 0; i < n; ++i) ++branches[i <= best_cut ? 0 : 1][sorted_[i].second];
    return Candidate{j, threshold, score_split(branches)};
  }

  const Dataset& data_;
  const TreeOptions& options_;
  std::size_t classes_;
  std::vector<std::pair<double, std::size_t>> sorted_;
};

double prune_node(TreeNode& node, double confidence) {
  const double n = static_cast<double>(node.total());
  const double as_leaf = n * pessimistic_error_rate(node.errors(), node.total(), confidence);
  if (node.is_leaf()) return as_leaf;
  double as_subtree = 0.0;
  for (auto& child : node.children) {
    if (child) as_subtree += prune_node(*child, confidence);
  }
  if (as_leaf <= as_subtree) {
    node.children.clear();
    node.feature.reset();
    node.threshold = 0.0;
    return as_leaf;
  }
  return as_subtree;
}

void count_leaves(const TreeNode& node, std::size_t& leaves, std::size_t depth, std::size_t& deepest) {
  deepest = std::max(deepest, depth);
  if (node.is_leaf()) {
    ++leaves;
    return;
  }
  for (const auto& child : node.children) {
    if (child) count_leaves(*child, leaves, depth + 1, deepest);
  }
}

void write_counts(std::ostream& out, const std::vector<std::size_t>& counts) {
  for (std::size_t i = 0; i < counts.size(); ++i) out << (i ? "," : "") << counts[i];
}

void dump_node(std::ostream& out, const Schema& schema, const TreeNode& node, std::size_t indent) {
  const std::string pad(indent * 2, ' ');
  if (node.is_leaf()) {
    out << pad << "leaf " << schema.class_values()[node.majority] << " counts=";
    write_counts(out, node.class_counts);
    out << '\n';
    return;
  }
  const Feature& f = schema.feature(*node.feature);
  out << pad << "split " << f.name << " counts=";
  write_counts(out, node.class_counts);
  out << '\n';
  for (std::size_t b = 0; b < node.children.size(); ++b) {
    out << pad << "  ";
    if (f.is_discrete()) {
      out << "= " << f.values[b];
    } else {
      out << (b == 0 ? "<= " : "> ") << node.threshold;
    }
    if (!node.children[b]) {
      out << " (empty)\n";
      continue;
    }
    out << '\n';
    dump_node(out, schema, *node.children[b], indent + 2);
  }
}

}  // namespace

std::size_t TreeNode::total() const {
  std::size_t n = 0;
  for (std::size_t c : class_counts) n += c;
  return n;
}

std::size_t TreeNode::heaviest_child() const {
  std::size_t best = children.size();
  std::size_t best_total = 0;
  for (std::size_t i = 0; i < children.size(); ++i) {
    if (!children[i]) continue;
    const std::size_t t = children[i]->total();
    if (best == children.size() || t > best_total) {
      best = i;
      best_total = t;
    }
  }
  return best;
}

double entropy_bits(std::span<const std::size_t> counts) {
  std::size_t total = 0;
  for (std::size_t c : counts) total += c;
  return total == 0 ? 0.0 : entropy_of(counts, static_cast<double>(total));
}

SplitScore score_split(const std::vector<std::vector<std::size_t>>& counts_by_branch) {
  if (counts_by_branch.size() < 2) throw std::invalid_argument("a split needs at least two branches");
  const std::size_t classes = counts_by_branch.front().size();
  std::vector<std::size_t> parent(classes, 0);
  std::vector<std::size_t> sizes;
  std::size_t total = 0;
  for (const auto& branch : counts_by_branch) {
    if (branch.size() != classes) throw std::invalid_argument("ragged branch counts");
    std::size_t n = 0;
    for (std::size_t c = 0; c < classes; ++c) {
      parent[c] += branch[c];
      n += branch[c];
    }
    sizes.push_back(n);
    total += n;
  }
  if (total == 0) throw std::invalid_argument("a split needs at least one example");

  const double t = static_cast<double>(total);
  SplitScore s;
  s.gain = entropy_of(parent, t);
  for (std::size_t b = 0; b < counts_by_branch.size(); ++b) {
    if (sizes[b] == 0) continue;
    const double w = static_cast<double>(sizes[b]) / t;
    s.gain -= w * entropy_of(counts_by_branch[b], static_cast<double>(sizes[b]));
    s.split_info -= w * std::log2(w);
  }
  if (std::abs(s.gain) < kGainEpsilon) s.gain = 0.0;
  s.gain_ratio = s.split_info > 0.0 ? s.gain / s.split_info : 0.0;
  return s;
}

double gain_ratio(const std::vector<std::vector<std::size_t>>& counts_by_branch) {
  return score_split(counts_by_branch).gain_ratio;
}

double pessimistic_error_rate(std::size_t errors, std::size_t n, double confidence) {
  if (n == 0) throw std::invalid_argument("pessimistic bound of an empty node");
  if (!(confidence > 0.0 && confidence < 1.0)) {
    throw std::invalid_argument("confidence must lie in (0,1)");
  }
  if (errors >= n) return 1.0;
  if (errors == 0) return 1.0 - std::pow(confidence, 1.0 / static_cast<double>(n));
  // P(X <= e | n, p) = 1 - I_p(e+1, n-e); solve for P = confidence.
  return boost::math::ibeta_inv(static_cast<double>(errors + 1), static_cast<double>(n - errors),
                                1.0 - confidence);
}

double estimated_errors(const TreeNode& node, double confidence) {
  if (node.is_leaf()) {
    return static_cast<double>(node.total()) *
           pessimistic_error_rate(node.errors(), node.total(), confidence);
  }
  double sum = 0.0;
  for (const auto& child : node.children) {
    if (child) sum += estimated_errors(*child, confidence);
  }
  return sum;
}

void prune_tree(TreeNode& root, double confidence) { prune_node(root, confidence); }

TreeClassifier::TreeClassifier(std::shared_ptr<const Schema> schema, std::unique_ptr<TreeNode> root)
    : schema_(std::move(schema)), root_(std::move(root)) {
  if (!root_) throw std::invalid_argument("tree without a root");
}

std::vector<double> TreeClassifier::predict(const Example& example) const {
  const TreeNode* node = root_.get();
  while (!node->is_leaf()) {
    const FeatureValue& v = example.values.at(*node->feature);
    std::size_t branch = node->heaviest_child();
    if (v.is_real()) {
      branch = v.as_real() <= node->threshold ? 0 : 1;
    } else if (v.is_token() && v.as_token() < node->children.size() &&
               node->children[v.as_token()]) {
      branch = v.as_token();
    }
    node = node->children[branch].get();
  }
  const double total = static_cast<double>(node->total());
  std::vector<double> scores(node->class_counts.size());
  for (std::size_t c = 0; c < scores.size(); ++c) {
    scores[c] = static_cast<double>(node->class_counts[c]) / total;
  }
  return scores;
}

void TreeClassifier::dump(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "tree features=" << schema_->feature_count() << " classes=" << schema_->class_count()
      << " leaves=" << leaf_count() << '\n';
  dump_node(out, *schema_, *root_, 0);
  out.precision(old);
}

std::size_t TreeClassifier::leaf_count() const {
  std::size_t leaves = 0, deepest = 0;
  count_leaves(*root_, leaves, 0, deepest);
  return leaves;
}

std::size_t TreeClassifier::depth() const {
  std::size_t leaves = 0, deepest = 0;
  count_leaves(*root_, leaves, 0, deepest);
  return deepest;
}

std::unique_ptr<TreeNode> grow_tree(const Dataset& train, std::span<const std::size_t> rows,
                                    const TreeOptions& options) {
  if (rows.empty()) throw std::invalid_argument("empty training set");
  for (std::size_t r : rows) {
    if (r >= train.size()) throw std::out_of_range("training row out of range");
  }
  Grower grower(train, options);
  return grower.grow(std::vector<std::size_t>(rows.begin(), rows.end()));
}

TreeClassifier train_tree(const Dataset& train, std::span<const std::size_t> rows,
                          const TreeOptions& options) {
  auto root = grow_tree(train, rows, options);
  if (options.prune) prune_tree(*root, options.confidence);
  return TreeClassifier(train.shared_schema(), std::move(root));
}

TreeClassifier train_tree(const Dataset& train, const TreeOptions& options) {
  std::vector<std::size_t> rows(train.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return train_tree(train, rows, options);
}

std::shared_ptr<const Classifier> TreeLearner::fit(const Dataset& train,
                                                   std::span<const std::size_t> rows,
                                                   std::uint64_t /*seed*/) const {
  return std::make_shared<TreeClassifier>(train_tree(train, rows, options_));
}

}  // namespace ensbench
