#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ensbench/classifier.hpp"
#include "ensbench/dataset.hpp"
#include "ensbench/sampling.hpp"

namespace ensbench {

/// p_i = (1 + m_i^4) / sum_j (1 + m_j^4).
ProbabilityVector arcing_probabilities(std::span<const std::size_t> misses);

inline constexpr double kZeroErrorTolerance = 1e-12;
inline constexpr double kPerfectMemberWeight = 3.0;
inline constexpr double kFailedMemberWeight = 0.001;

struct AdaUpdate {
  ProbabilityVector next;
  double vote_weight;
  bool restarted;
  double error;  // epsilon under the incoming distribution
};

/// One resampling boosting step. epsilon <= 1e-12 restarts with weight 3.0,
/// epsilon >= 0.5 restarts with weight 0.001; both reset to uniform.
/// Otherwise misclassified mass is scaled by beta = (1 - eps) / eps, the
/// vector is renormalized and the weight is ln(beta).
AdaUpdate ada_update(const ProbabilityVector& p, const std::vector<bool>& misclassified);

enum class Combiner { average_scores, plurality_vote, weighted_vote };
enum class Method { single, simple, bagging, arcing, ada };

std::string_view to_string(Combiner combiner);
std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

class Ensemble {
 public:
  /// Throws std::invalid_argument on an empty member list, a weight count
  /// mismatch, members disagreeing on class count, or a non-positive weight
  /// under WeightedVote.
  Ensemble(std::vector<std::shared_ptr<const Classifier>> members, std::vector<double> vote_weights,
           Combiner combiner);

  std::size_t size() const { return members_.size(); }
  std::size_t class_count() const { return members_.front()->class_count(); }
  const Classifier& member(std::size_t i) const { return *members_.at(i); }
  const std::vector<double>& vote_weights() const { return weights_; }
  Combiner combiner() const { return combiner_; }

 private:
  std::vector<std::shared_ptr<const Classifier>> members_;
  std::vector<double> weights_;
  Combiner combiner_;
};

struct Prediction {
  std::size_t label;
  /// AverageScores: mean member scores. Votes: share of (weighted) votes.
  std::vector<double> scores;
};

/// Combines the given member score vectors; weights are ignored except by
/// WeightedVote. Ties go to the lowest class index.
Prediction combine_scores(Combiner combiner, const std::vector<std::vector<double>>& member_scores,
                          std::span<const double> weights);

/// Uses only the first `prefix` members; throws std::out_of_range unless
/// 1 <= prefix <= size().
Prediction combine(const Ensemble& ensemble, const Example& example, std::size_t prefix);
inline Prediction combine(const Ensemble& ensemble, const Example& example) {
  return combine(ensemble, example, ensemble.size());
}

/// Predicted label for each prefix size, querying every member once.
std::vector<std::size_t> combine_prefixes(const Ensemble& ensemble, const Example& example,
                                          std::span<const std::size_t> prefixes);

/// Records what each builder did, for inspection in tests.
struct BuildLog {
  std::vector<IndexSample> samples;
  /// Distribution each member's sample was drawn from (resampling methods).
  std::vector<std::vector<double>> distributions;
  /// Per member, which original examples it misclassified (boosting methods).
  std::vector<std::vector<bool>> misclassified;
  std::vector<bool> restarts;
};

// Every builder trains on `train` (N examples) and is deterministic in
// (train, members, seed). Member k draws its sample from
// derive_seed(seed, {k, resample}) and trains with derive_seed(seed, {k, init}).

std::shared_ptr<const Classifier> build_single(const Learner& learner, const Dataset& train,
                                               std::uint64_t seed);
Ensemble build_bagging(const Learner& learner, const Dataset& train, std::size_t members,
                       std::uint64_t seed, BuildLog* log = nullptr);
/// Networks only. `shared_init` trains every member from the same init seed.
Ensemble build_simple(const Learner& learner, const Dataset& train, std::size_t members,
                      std::uint64_t seed, BuildLog* log = nullptr, bool shared_init = false);
Ensemble build_arcing(const Learner& learner, const Dataset& train, std::size_t members,
                      std::uint64_t seed, BuildLog* log = nullptr);
Ensemble build_ada(const Learner& learner, const Dataset& train, std::size_t members,
                   std::uint64_t seed, BuildLog* log = nullptr);

/// Dispatch on method; `single` yields a one-member ensemble.
Ensemble build_ensemble(Method method, const Learner& learner, const Dataset& train,
                        std::size_t members, std::uint64_t seed, BuildLog* log = nullptr);

/// Header with combiner and vote weights, then each member's dump.
void dump_ensemble(std::ostream& out, const Ensemble& ensemble);

}  // namespace ensbench
