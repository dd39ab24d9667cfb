#include "ensbench/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ensbench/random.hpp"

namespace ensbench {

FoldPlan::FoldPlan(std::vector<std::size_t> assignment, std::size_t k, std::uint64_t seed)
    : assignment_(std::move(assignment)), k_(k), seed_(seed) {
  for (std::size_t f : assignment_) {
    if (f >= k_) throw std::invalid_argument("fold index out of range");
  }
}

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] == fold) rows.push_back(i);
  }
  return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < assignment_.size(); ++i) {
    if (assignment_[i] != fold) rows.push_back(i);
  }
  return rows;
}

FoldPlan make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (k > n) {
    throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds example count " +
                                std::to_string(n));
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  std::vector<std::size_t> assignment(n);
  for (std::size_t i = 0; i < n; ++i) assignment[order[i]] = i % k;
  return FoldPlan(std::move(assignment), k, seed);
}

IndexSample bootstrap_sample(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  IndexSample sample(n);
  for (auto& s : sample) s = rng.index(n);
  return sample;
}

void check_probabilities(std::span<const double> p) {
  if (p.empty()) throw std::invalid_argument("empty probability vector");
  double sum = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("probability entries must be finite and nonnegative");
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > ProbabilityVector::kTolerance) {
    throw std::invalid_argument("probabilities sum to " + std::to_string(sum) + ", not 1");
  }
}

ProbabilityVector::ProbabilityVector(std::vector<double> p) : p_(std::move(p)) {
  check_probabilities(p_);
}

ProbabilityVector ProbabilityVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty probability vector");
  return ProbabilityVector(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

ProbabilityVector ProbabilityVector::normalized(std::vector<double> masses) {
  double total = 0.0;
  for (double m : masses) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw std::invalid_argument("masses must be nonnegative");
    total += m;
  }
  if (!(total > 0.0)) throw std::invalid_argument("masses sum to zero");
  for (double& m : masses) m /= total;
  return ProbabilityVector(std::move(masses));
}

IndexSample weighted_sample(const ProbabilityVector& p, std::size_t n, std::uint64_t seed) {
  // Inverse-CDF lookup. Cumulative mass from the last positive entry onward
  // is pinned to 1 so rounding can never push a draw past it; zero-probability
  // entries are never selected because upper_bound skips runs of equal values.
  std::vector<double> cumulative(p.size());
  std::partial_sum(p.values().begin(), p.values().end(), cumulative.begin());
  std::size_t last = p.size() - 1;
  while (last > 0 && p[last] == 0.0) --last;
  std::fill(cumulative.begin() + static_cast<std::ptrdiff_t>(last), cumulative.end(), 1.0);
  Rng rng(seed);
  IndexSample sample(n);
  for (auto& s : sample) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    s = static_cast<std::size_t>(it - cumulative.begin());
  }
  return sample;
}

}  // namespace ensbench
