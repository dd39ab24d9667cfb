#include "ensbench/classifier.hpp"

#include <stdexcept>

namespace ensbench {

std::size_t argmax(std::span<const double> scores) {
  if (scores.empty()) throw std::invalid_argument("argmax of an empty score vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::string_view to_string(LearnerKind kind) {
  return kind == LearnerKind::tree ? "tree" : "network";
}

std::optional<LearnerKind> parse_learner(std::string_view text) {
  if (text == "tree") return LearnerKind::tree;
  if (text == "network") return LearnerKind::network;
  return std::nullopt;
}

}  // namespace ensbench
