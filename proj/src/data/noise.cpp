#include "ensbench/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ensbench/random.hpp"

namespace ensbench {
namespace {

// Index in [0, domain) different from `current`, uniformly.
std::size_t other_index(Rng& rng, std::size_t domain, std::size_t current) {
  const std::size_t pick = rng.index(domain - 1);
  return pick >= current ? pick + 1 : pick;
}

}  // namespace

Dataset inject_noise(const Dataset& data, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("noise rate must lie in [0,1]");
  const Schema& schema = data.schema();
  const std::size_t width = schema.feature_count();

  std::vector<std::vector<double>> observed(width);
  for (std::size_t j = 0; j < width; ++j) {
    if (schema.feature(j).is_discrete()) continue;
    for (const auto& ex : data.examples()) {
      if (ex.values[j].is_real()) observed[j].push_back(ex.values[j].as_real());
    }
    std::sort(observed[j].begin(), observed[j].end());
    observed[j].erase(std::unique(observed[j].begin(), observed[j].end()), observed[j].end());
  }

  Rng rng(seed);
  std::vector<Example> noisy = data.examples();
  for (auto& ex : noisy) {
    for (std::size_t j = 0; j < width; ++j) {
      const bool hit = rng.uniform() < rate;
      auto& v = ex.values[j];
      if (!hit || v.is_missing()) continue;
      const auto& f = schema.feature(j);
      if (f.is_discrete()) {
        v = FeatureValue::token(other_index(rng, f.values.size(), v.as_token()));
      } else {
        const auto& domain = observed[j];
        if (domain.size() < 2) continue;
        const auto pos = static_cast<std::size_t>(
            std::lower_bound(domain.begin(), domain.end(), v.as_real()) - domain.begin());
        v = FeatureValue::real(domain[other_index(rng, domain.size(), pos)]);
      }
    }
    if (rng.uniform() < rate) ex.label = other_index(rng, schema.class_count(), ex.label);
  }
  return Dataset(data.name(), data.shared_schema(), std::move(noisy), data.imputed_counts());
}

OneSidedNoiseProblem gen_one_sided_noise(std::size_t n_train, std::size_t n_test, double noise,
                                         std::uint64_t seed) {
  if (!(noise >= 0.0 && noise < 1.0)) throw std::invalid_argument("noise must lie in [0,1)");
  std::vector<Feature> features;
  for (std::size_t j = 0; j < kSyntheticFeatures; ++j) {
    features.push_back(Feature{"x" + std::to_string(j + 1), FeatureKind::continuous, {}});
  }
  auto schema = std::make_shared<const Schema>(std::move(features),
                                               std::vector<std::string>{"negative", "positive"});
  Rng rng(seed);
  const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const std::array<double, 2> normal{std::cos(angle), std::sin(angle)};

  auto draw = [&](std::size_t n) {
    std::vector<Example> out(n);
    for (auto& ex : out) {
      ex.values.reserve(kSyntheticFeatures);
      for (std::size_t j = 0; j < kSyntheticFeatures; ++j) {
        ex.values.push_back(FeatureValue::real(rng.uniform(-1.0, 1.0)));
      }
      const double side = normal[0] * ex.values[0].as_real() + normal[1] * ex.values[1].as_real();
      ex.label = side > 0.0 ? 1 : 0;
    }
    return out;
  };
  auto train = draw(n_train);
  auto test = draw(n_test);

  std::vector<std::size_t> positives;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (train[i].label == 1) positives.push_back(i);
  }
  rng.shuffle(positives);
  const auto flips =
      static_cast<std::size_t>(std::llround(noise * static_cast<double>(positives.size())));
  std::vector<std::size_t> flipped(positives.begin(),
                                   positives.begin() + static_cast<std::ptrdiff_t>(flips));
  std::sort(flipped.begin(), flipped.end());
  for (std::size_t i : flipped) train[i].label = 0;

  return OneSidedNoiseProblem{Dataset("one-sided-noise-train", schema, std::move(train)),
                              Dataset("one-sided-noise-test", schema, std::move(test)), normal,
                              std::move(flipped)};
}

}  // namespace ensbench
