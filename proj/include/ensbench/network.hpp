#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ensbench/classifier.hpp"
#include "ensbench/encoding.hpp"

namespace ensbench {

struct NetworkConfig {
  std::size_t hidden_units = 5;  // 0 = perceptron (inputs wired to outputs)
  std::size_t epochs = 30;
  double learning_rate = 0.15;
  double momentum = 0.9;
  double init_half_range = 0.5;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// Hidden units and epochs for a named dataset, or the size-based fallback
/// hidden = max(5, outputs, ceil(inputs/10)) and epochs 70 / 40 / 30 for
/// fewer than 250 / up to 500 / more examples.
NetworkConfig lookup_network_config(std::string_view dataset_name, std::size_t n_inputs,
                                    std::size_t n_outputs, std::size_t n_examples);

/// Single-hidden-layer sigmoid network. All parameters live in one flat
/// vector laid out as
///   hidden > 0:  W1 (hidden x inputs), b1 (hidden), W2 (outputs x hidden), b2 (outputs)
///   hidden = 0:  W (outputs x inputs), b (outputs)
class NetworkModel {
 public:
  /// All parameters zero.
  NetworkModel(std::size_t inputs, std::size_t hidden, std::size_t outputs);

  static NetworkModel random(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                             double half_range, std::uint64_t seed);

  std::size_t inputs() const { return inputs_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t outputs() const { return outputs_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<const double> parameters() const { return params_; }
  std::span<double> parameters() { return params_; }

  /// Output activations.
  std::vector<double> forward(std::span<const double> x) const;
  /// 0.5 * sum (o - t)^2.
  double squared_error(std::span<const double> x, std::span<const double> target) const;
  /// dE/dw for every parameter at one example, in the flat layout; also
  /// returns the error.
  double gradient(std::span<const double> x, std::span<const double> target,
                  std::span<double> grad) const;

  /// Dimensions line, then the flat parameters one per line, 17 significant digits.
  void dump(std::ostream& out) const;

  friend bool operator==(const NetworkModel&, const NetworkModel&) = default;

 private:
  std::size_t inputs_;
  std::size_t hidden_;
  std::size_t outputs_;
  std::vector<double> params_;
};

/// Online backpropagation with momentum. Each epoch visits `rows` (a
/// multiset of indices into `data`) in a fresh seeded shuffle. When `start`
/// is given it replaces the random initialization.
NetworkModel train_network(const EncodedSet& data, std::span<const std::size_t> rows,
                           const NetworkConfig& config, std::uint64_t seed,
                           std::optional<NetworkModel> start = std::nullopt);
NetworkModel train_network(const EncodedSet& data, const NetworkConfig& config,
                           std::uint64_t seed);

class NetworkClassifier : public Classifier {
 public:
  NetworkClassifier(Encoder encoder, NetworkModel model);

  std::size_t class_count() const override { return encoder_.schema().class_count(); }
  /// Output activations; a single output o maps to (1 - o, o).
  std::vector<double> predict(const Example& example) const override;
  void dump(std::ostream& out) const override;

  const NetworkModel& model() const { return model_; }
  const Encoder& encoder() const { return encoder_; }

 private:
  Encoder encoder_;
  NetworkModel model_;
};

/// Trains networks with a fixed configuration; callers resolve per-dataset
/// presets with lookup_network_config.
class NetworkLearner : public Learner {
 public:
  explicit NetworkLearner(NetworkConfig config) : config_(config) {}

  LearnerKind kind() const override { return LearnerKind::network; }
  const NetworkConfig& config() const { return config_; }

  std::shared_ptr<const Classifier> fit(const Dataset& train, std::span<const std::size_t> rows,
                                        std::uint64_t seed) const override;

 private:
  NetworkConfig config_;
};

}  // namespace ensbench
