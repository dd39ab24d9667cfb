#include "ensbench/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "ensbench/random.hpp"

namespace ensbench {
namespace {

std::uint64_t member_seed(std::uint64_t seed, std::size_t k, std::uint64_t tag) {
  return derive_seed(seed, {static_cast<std::uint64_t>(k), tag});
}

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> rows(d.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

std::vector<bool> misclassified_originals(const Classifier& c, const Dataset& train) {
  std::vector<bool> wrong(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    wrong[i] = c.classify(train.example(i)) != train.example(i).label;
  }
  return wrong;
}

void require_members(std::size_t members) {
  if (members < 1) throw std::invalid_argument("members must be >= 1");
}

Combiner averaging_or_vote(const Learner& learner) {
  return learner.kind() == LearnerKind::network ? Combiner::average_scores
                                                : Combiner::plurality_vote;
}

}  // namespace

ProbabilityVector arcing_probabilities(std::span<const std::size_t> misses) {
  if (misses.empty()) throw std::invalid_argument("empty miss-count vector");
  std::vector<double> mass(misses.size());
  for (std::size_t i = 0; i < misses.size(); ++i) {
    const double m = static_cast<double>(misses[i]);
    mass[i] = 1.0 + m * m * m * m;
  }
  return ProbabilityVector::normalized(std::move(mass));
}

AdaUpdate ada_update(const ProbabilityVector& p, const std::vector<bool>& misclassified) {
  if (misclassified.size() != p.size()) {
    throw std::invalid_argument("misclassification mask length differs from distribution");
  }
  double eps = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (misclassified[i]) eps += p[i];
  }
  if (eps <= kZeroErrorTolerance) {
    return {ProbabilityVector::uniform(p.size()), kPerfectMemberWeight, true, eps};
  }
  if (eps >= 0.5) return {ProbabilityVector::uniform(p.size()), kFailedMemberWeight, true, eps};
  const double beta = (1.0 - eps) / eps;
  std::vector<double> mass = p.values();
  for (std::size_t i = 0; i < mass.size(); ++i) {
    if (misclassified[i]) mass[i] *= beta;
  }
  return {ProbabilityVector::normalized(std::move(mass)), std::log(beta), false, eps};
}

std::string_view to_string(Combiner combiner) {
  switch (combiner) {
    case Combiner::average_scores: return "average_scores";
    case Combiner::plurality_vote: return "plurality_vote";
    case Combiner::weighted_vote: return "weighted_vote";
  }
  return "unknown";
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::single: return "single";
    case Method::simple: return "simple";
    case Method::bagging: return "bagging";
    case Method::arcing: return "arcing";
    case Method::ada: return "ada";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : {Method::single, Method::simple, Method::bagging, Method::arcing, Method::ada}) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

Ensemble::Ensemble(std::vector<std::shared_ptr<const Classifier>> members,
                   std::vector<double> vote_weights, Combiner combiner)
    : members_(std::move(members)), weights_(std::move(vote_weights)), combiner_(combiner) {
  if (members_.empty()) throw std::invalid_argument("an ensemble needs at least one member");
  if (weights_.size() != members_.size()) {
    throw std::invalid_argument("vote weight count differs from member count");
  }
  for (const auto& m : members_) {
    if (!m) throw std::invalid_argument("null ensemble member");
    if (m->class_count() != members_.front()->class_count()) {
      throw std::invalid_argument("ensemble members disagree on class count");
    }
  }
  if (combiner_ == Combiner::weighted_vote) {
    for (double w : weights_) {
      if (!(w > 0.0)) throw std::invalid_argument("weighted vote requires positive weights");
    }
  }
}

Prediction combine_scores(Combiner combiner, const std::vector<std::vector<double>>& member_scores,
                          std::span<const double> weights) {
  if (member_scores.empty()) throw std::invalid_argument("nothing to combine");
  const std::size_t classes = member_scores.front().size();
  std::vector<double> agg(classes, 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < member_scores.size(); ++m) {
    const auto& s = member_scores[m];
    if (s.size() != classes) throw std::invalid_argument("member score widths differ");
    if (combiner == Combiner::average_scores) {
      for (std::size_t c = 0; c < classes; ++c) agg[c] += s[c];
      total += 1.0;
    } else {
      const double w = combiner == Combiner::weighted_vote ? weights[m] : 1.0;
      agg[argmax(s)] += w;
      total += w;
    }
  }
  for (double& a : agg) a /= total;
  const std::size_t label = argmax(agg);
  return {label, std::move(agg)};
}

Prediction combine(const Ensemble& ensemble, const Example& example, std::size_t prefix) {
  if (prefix < 1 || prefix > ensemble.size()) {
    throw std::out_of_range("prefix " + std::to_string(prefix) + " outside [1, " +
                            std::to_string(ensemble.size()) + "]");
  }
  std::vector<std::vector<double>> scores;
  scores.reserve(prefix);
  for (std::size_t m = 0; m < prefix; ++m) scores.push_back(ensemble.member(m).predict(example));
  return combine_scores(ensemble.combiner(), scores,
                        std::span<const double>(ensemble.vote_weights()).first(prefix));
}

std::vector<std::size_t> combine_prefixes(const Ensemble& ensemble, const Example& example,
                                          std::span<const std::size_t> prefixes) {
  std::vector<std::size_t> order(prefixes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t p : prefixes) {
    if (p < 1 || p > ensemble.size()) throw std::out_of_range("prefix outside ensemble size");
  }
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return prefixes[a] < prefixes[b]; });

  // Running totals accumulated in member order, normalized the same way as
  // combine_scores so every prefix label matches combine() exactly.
  std::vector<double> agg(ensemble.class_count(), 0.0);
  std::vector<double> normalized(agg.size());
  double total = 0.0;
  std::vector<std::size_t> labels(prefixes.size());
  std::size_t used = 0;
  for (std::size_t idx : order) {
    for (; used < prefixes[idx]; ++used) {
      const auto s = ensemble.member(used).predict(example);
      if (ensemble.combiner() == Combiner::average_scores) {
        for (std::size_t c = 0; c < agg.size(); ++c) agg[c] += s[c];
        total += 1.0;
      } else {
        const double w =
            ensemble.combiner() == Combiner::weighted_vote ? ensemble.vote_weights()[used] : 1.0;
        agg[argmax(s)] += w;
        total += w;
      }
    }
    for (std::size_t c = 0; c < agg.size(); ++c) normalized[c] = agg[c] / total;
    labels[idx] = argmax(normalized);
  }
  return labels;
}

std::shared_ptr<const Classifier> build_single(const Learner& learner, const Dataset& train,
                                               std::uint64_t seed) {
  const auto rows = all_rows(train);
  return learner.fit(train, rows, member_seed(seed, 0, purpose::init));
}

Ensemble build_bagging(const Learner& learner, const Dataset& train, std::size_t members,
                       std::uint64_t seed, BuildLog* log) {
  require_members(members);
  std::vector<std::shared_ptr<const Classifier>> out;
  for (std::size_t k = 0; k < members; ++k) {
    const IndexSample sample = bootstrap_sample(train.size(), member_seed(seed, k, purpose::resample));
    out.push_back(learner.fit(train, sample, member_seed(seed, k, purpose::init)));
    if (log) log->samples.push_back(sample);
  }
  return Ensemble(std::move(out), std::vector<double>(members, 1.0), averaging_or_vote(learner));
}

Ensemble build_simple(const Learner& learner, const Dataset& train, std::size_t members,
                      std::uint64_t seed, BuildLog* log, bool shared_init) {
  require_members(members);
  if (learner.kind() != LearnerKind::network) {
    throw std::invalid_argument("simple requires network learner");
  }
  const auto rows = all_rows(train);
  std::vector<std::shared_ptr<const Classifier>> out;
  for (std::size_t k = 0; k < members; ++k) {
    out.push_back(learner.fit(train, rows, member_seed(seed, shared_init ? 0 : k, purpose::init)));
    if (log) log->samples.push_back(rows);
  }
  return Ensemble(std::move(out), std::vector<double>(members, 1.0), Combiner::average_scores);
}

Ensemble build_arcing(const Learner& learner, const Dataset& train, std::size_t members,
                      std::uint64_t seed, BuildLog* log) {
  require_members(members);
  std::vector<std::size_t> misses(train.size(), 0);
  std::vector<std::shared_ptr<const Classifier>> out;
  for (std::size_t k = 0; k < members; ++k) {
    const ProbabilityVector p = arcing_probabilities(misses);
    const IndexSample sample =
        weighted_sample(p, train.size(), member_seed(seed, k, purpose::resample));
    auto member = learner.fit(train, sample, member_seed(seed, k, purpose::init));
    const auto wrong = misclassified_originals(*member, train);
    for (std::size_t i = 0; i < wrong.size(); ++i) misses[i] += wrong[i];
    out.push_back(std::move(member));
    if (log) {
      log->samples.push_back(sample);
      log->distributions.push_back(p.values());
      log->misclassified.push_back(wrong);
    }
  }
  return Ensemble(std::move(out), std::vector<double>(members, 1.0), Combiner::plurality_vote);
}

Ensemble build_ada(const Learner& learner, const Dataset& train, std::size_t members,
                   std::uint64_t seed, BuildLog* log) {
  require_members(members);
  ProbabilityVector p = ProbabilityVector::uniform(train.size());
  std::vector<std::shared_ptr<const Classifier>> out;
  std::vector<double> weights;
  for (std::size_t k = 0; k < members; ++k) {
    const IndexSample sample =
        weighted_sample(p, train.size(), member_seed(seed, k, purpose::resample));
    auto member = learner.fit(train, sample, member_seed(seed, k, purpose::init));
    const auto wrong = misclassified_originals(*member, train);
    AdaUpdate step = ada_update(p, wrong);
    if (log) {
      log->samples.push_back(sample);
      log->distributions.push_back(p.values());
      log->misclassified.push_back(wrong);
      log->restarts.push_back(step.restarted);
    }
    out.push_back(std::move(member));
    weights.push_back(step.vote_weight);
    p = std::move(step.next);
  }
  return Ensemble(std::move(out), std::move(weights), Combiner::weighted_vote);
}

Ensemble build_ensemble(Method method, const Learner& learner, const Dataset& train,
                        std::size_t members, std::uint64_t seed, BuildLog* log) {
  switch (method) {
    case Method::single:
      return Ensemble({build_single(learner, train, seed)}, {1.0}, Combiner::plurality_vote);
    case Method::simple: return build_simple(learner, train, members, seed, log);
    case Method::bagging: return build_bagging(learner, train, members, seed, log);
    case Method::arcing: return build_arcing(learner, train, members, seed, log);
    case Method::ada: return build_ada(learner, train, members, seed, log);
  }
  throw std::invalid_argument("unknown method");
}

void dump_ensemble(std::ostream& out, const Ensemble& ensemble) {
  const auto old = out.precision(17);
  out << "ensemble combiner=" << to_string(ensemble.combiner()) << " members=" << ensemble.size()
      << '\n';
  out << "weights";
  for (double w : ensemble.vote_weights()) out << ' ' << w;
  out << '\n';
  for (std::size_t m = 0; m < ensemble.size(); ++m) {
    out << "member " << m << '\n';
    ensemble.member(m).dump(out);
  }
  out.precision(old);
}

}  // namespace ensbench
