#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "ensbench/dataset.hpp"

namespace ensbench {

/// Perturbs every feature cell and every label independently with
/// probability `rate`. A perturbed cell takes a different value chosen
/// uniformly: discrete features and labels from the other declared values,
/// continuous features from the distinct values observed for that feature
/// across the whole dataset. Cells whose domain has a single member are left
/// alone, as are missing cells.
Dataset inject_noise(const Dataset& data, double rate, std::uint64_t seed);

struct OneSidedNoiseProblem {
  Dataset train;
  Dataset test;
  /// Unit normal of the concept hyperplane over features x1, x2 (through the
  /// origin). Class "positive" is the side where normal . x > 0.
  std::array<double, 2> normal;
  /// Train rows whose label was flipped from positive to negative.
  std::vector<std::size_t> flipped;
};

inline constexpr std::size_t kSyntheticFeatures = 6;

/// Points uniform in [-1,1]^6, labelled by a random hyperplane on the first
/// two features (the other four are irrelevant). Then exactly
/// round(noise * positives) positive-side training points, chosen uniformly,
/// are relabelled negative. Test labels stay clean.
OneSidedNoiseProblem gen_one_sided_noise(std::size_t n_train, std::size_t n_test, double noise,
                                         std::uint64_t seed);

}  // namespace ensbench
