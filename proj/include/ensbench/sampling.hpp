#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace ensbench {

/// Seeded partition of n example indices into k folds whose sizes differ by
/// at most one.
class FoldPlan {
 public:
  FoldPlan(std::vector<std::size_t> assignment, std::size_t k, std::uint64_t seed);

  std::size_t fold_count() const { return k_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t size() const { return assignment_.size(); }
  std::size_t fold_of(std::size_t example) const { return assignment_[example]; }
  const std::vector<std::size_t>& assignment() const { return assignment_; }

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;

 private:
  std::vector<std::size_t> assignment_;
  std::size_t k_;
  std::uint64_t seed_;
};

/// Shuffles 0..n-1 with the seed and deals the result round-robin into k
/// folds. Throws std::invalid_argument when k < 2 or k > n.
FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed);

/// Ordered multiset of example indices (a resampled training set).
using IndexSample = std::vector<std::size_t>;

/// n uniform draws with replacement from [0, n).
IndexSample bootstrap_sample(std::size_t n, std::uint64_t seed);

/// Per-example selection probabilities: entries >= 0 summing to 1 within
/// 1e-9. Construction validates; use normalized() to build from raw masses.
class ProbabilityVector {
 public:
  static constexpr double kTolerance = 1e-9;

  explicit ProbabilityVector(std::vector<double> p);

  static ProbabilityVector uniform(std::size_t n);
  /// Divides nonnegative masses by their sum.
  static ProbabilityVector normalized(std::vector<double> masses);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& values() const { return p_; }

 private:
  std::vector<double> p_;
};

/// n independent draws where index i is chosen with probability p[i].
IndexSample weighted_sample(const ProbabilityVector& p, std::size_t n, std::uint64_t seed);

/// Validates raw probabilities for weighted_sample-style callers.
void check_probabilities(std::span<const double> p);

}  // namespace ensbench
