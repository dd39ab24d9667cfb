#include "ensbench/network.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ensbench/random.hpp"

namespace ensbench {
namespace {

struct Preset {
  std::string_view name;
  std::size_t hidden;
  std::size_t epochs;
};

constexpr std::array<Preset, 23> kPresets{{
    {"breast-cancer-w", 5, 20}, {"credit-a", 10, 35},       {"credit-g", 10, 30},
    {"diabetes", 5, 30},        {"glass", 10, 80},          {"heart-cleveland", 5, 40},
    {"hepatitis", 10, 60},      {"house-votes-84", 5, 40},  {"hypo", 15, 40},
    {"ionosphere", 10, 40},     {"iris", 5, 80},            {"kr-vs-kp", 15, 20},
    {"labor", 10, 80},          {"letter", 40, 30},         {"promoters-936", 20, 30},
    {"ribosome-bind", 20, 35},  {"satellite", 15, 30},      {"segmentation", 15, 20},
    {"sick", 10, 40},           {"sonar", 10, 60},          {"soybean", 25, 40},
    {"splice", 25, 30},         {"vehicle", 10, 40},
}};

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void NetworkConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0,1)");
  if (!(init_half_range > 0.0)) throw std::invalid_argument("init_half_range must be > 0");
}

NetworkConfig lookup_network_config(std::string_view dataset_name, std::size_t n_inputs,
                                    std::size_t n_outputs, std::size_t n_examples) {
  NetworkConfig config;
  for (const auto& p : kPresets) {
    if (p.name == dataset_name) {
      config.hidden_units = p.hidden;
      config.epochs = p.epochs;
      return config;
    }
  }
  config.hidden_units = std::max({std::size_t{5}, n_outputs, (n_inputs + 9) / 10});
  config.epochs = n_examples < 250 ? 70 : n_examples <= 500 ? 40 : 30;
  return config;
}

NetworkModel::NetworkModel(std::size_t inputs, std::size_t hidden, std::size_t outputs)
    : inputs_(inputs), hidden_(hidden), outputs_(outputs) {
  if (inputs == 0 || outputs == 0) throw std::invalid_argument("network needs inputs and outputs");
  const std::size_t n = hidden == 0 ? outputs * (inputs + 1)
                                    : hidden * (inputs + 1) + outputs * (hidden + 1);
  params_.assign(n, 0.0);
}

NetworkModel NetworkModel::random(std::size_t inputs, std::size_t hidden, std::size_t outputs,
                                  double half_range, std::uint64_t seed) {
  NetworkModel model(inputs, hidden, outputs);
  Rng rng(seed);
  for (double& w : model.params_) w = rng.uniform(-half_range, half_range);
  return model;
}

std::vector<double> NetworkModel::forward(std::span<const double> x) const {
  if (x.size() != inputs_) throw std::invalid_argument("input width mismatch");
  std::vector<double> out(outputs_);
  const double* p = params_.data();
  if (hidden_ == 0) {
    const double* b = p + outputs_ * inputs_;
    for (std::size_t k = 0; k < outputs_; ++k) {
      out[k] = sigmoid(std::inner_product(x.begin(), x.end(), p + k * inputs_, b[k]));
    }
    return out;
  }
  std::vector<double> h(hidden_);
  const double* b1 = p + hidden_ * inputs_;
  for (std::size_t j = 0; j < hidden_; ++j) {
    h[j] = sigmoid(std::inner_product(x.begin(), x.end(), p + j * inputs_, b1[j]));
  }
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + outputs_ * hidden_;
  for (std::size_t k = 0; k < outputs_; ++k) {
    out[k] = sigmoid(std::inner_product(h.begin(), h.end(), w2 + k * hidden_, b2[k]));
  }
  return out;
}

double NetworkModel::squared_error(std::span<const double> x, std::span<const double> target) const {
  if (target.size() != outputs_) throw std::invalid_argument("target width mismatch");
  const auto o = forward(x);
  double e = 0.0;
  for (std::size_t k = 0; k < outputs_; ++k) e += 0.5 * (o[k] - target[k]) * (o[k] - target[k]);
  return e;
}

double NetworkModel::gradient(std::span<const double> x, std::span<const double> target,
                              std::span<double> grad) const {
  if (x.size() != inputs_) throw std::invalid_argument("input width mismatch");
  if (target.size() != outputs_) throw std::invalid_argument("target width mismatch");
  if (grad.size() != params_.size()) throw std::invalid_argument("gradient size mismatch");
  const double* p = params_.data();
  double e = 0.0;

  if (hidden_ == 0) {
    const double* b = p + outputs_ * inputs_;
    double* gb = grad.data() + outputs_ * inputs_;
    for (std::size_t k = 0; k < outputs_; ++k) {
      const double o = sigmoid(std::inner_product(x.begin(), x.end(), p + k * inputs_, b[k]));
      e += 0.5 * (o - target[k]) * (o - target[k]);
      const double delta = (o - target[k]) * o * (1.0 - o);
      for (std::size_t i = 0; i < inputs_; ++i) grad[k * inputs_ + i] = delta * x[i];
      gb[k] = delta;
    }
    return e;
  }

  const double* b1 = p + hidden_ * inputs_;
  const double* w2 = b1 + hidden_;
  const double* b2 = w2 + outputs_ * hidden_;
  double* g_b1 = grad.data() + hidden_ * inputs_;
  double* g_w2 = g_b1 + hidden_;
  double* g_b2 = g_w2 + outputs_ * hidden_;

  std::vector<double> h(hidden_);
  for (std::size_t j = 0; j < hidden_; ++j) {
    h[j] = sigmoid(std::inner_product(x.begin(), x.end(), p + j * inputs_, b1[j]));
  }
  std::vector<double> back(hidden_, 0.0);
  for (std::size_t k = 0; k < outputs_; ++k) {
    const double o = sigmoid(std::inner_product(h.begin(), h.end(), w2 + k * hidden_, b2[k]));
    e += 0.5 * (o - target[k]) * (o - target[k]);
    const double delta = (o - target[k]) * o * (1.0 - o);
    for (std::size_t j = 0; j < hidden_; ++j) {
      g_w2[k * hidden_ + j] = delta * h[j];
      back[j] += delta * w2[k * hidden_ + j];
    }
    g_b2[k] = delta;
  }
  for (std::size_t j = 0; j < hidden_; ++j) {
    const double delta = back[j] * h[j] * (1.0 - h[j]);
    for (std::size_t i = 0; i < inputs_; ++i) grad[j * inputs_ + i] = delta * x[i];
    g_b1[j] = delta;
  }
  return e;
}

void NetworkModel::dump(std::ostream& out) const {
  const auto old = out.precision(17);
  out << "network inputs=" << inputs_ << " hidden=" << hidden_ << " outputs=" << outputs_ << '\n';
  for (double w : params_) out << w << '\n';
  out.precision(old);
}

NetworkModel train_network(const EncodedSet& data, std::span<const std::size_t> rows,
                           const NetworkConfig& config, std::uint64_t seed,
                           std::optional<NetworkModel> start) {
  config.validate();
  if (rows.empty()) throw std::invalid_argument("empty training set");
  for (std::size_t r : rows) {
    if (r >= data.size()) throw std::out_of_range("training row out of range");
  }
  NetworkModel model = start ? std::move(*start)
                             : NetworkModel::random(data.input_width(), config.hidden_units,
                                                    data.target_width(), config.init_half_range,
                                                    derive_seed(seed, {purpose::init}));
  if (model.inputs() != data.input_width() || model.outputs() != data.target_width() ||
      model.hidden() != config.hidden_units) {
    throw std::invalid_argument("network dimensions do not match the data and config");
  }

  Rng order_rng(derive_seed(seed, {purpose::resample}));
  std::vector<std::size_t> order(rows.begin(), rows.end());
  std::vector<double> grad(model.parameter_count());
  std::vector<double> velocity(model.parameter_count(), 0.0);
  auto w = model.parameters();
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    order_rng.shuffle(order);
    for (std::size_t r : order) {
      model.gradient(data.inputs(r), data.target(r), grad);
      for (std::size_t i = 0; i < w.size(); ++i) {
        velocity[i] = -config.learning_rate * grad[i] + config.momentum * velocity[i];
        w[i] += velocity[i];
      }
    }
  }
  return model;
}

NetworkModel train_network(const EncodedSet& data, const NetworkConfig& config,
                           std::uint64_t seed) {
  std::vector<std::size_t> rows(data.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train_network(data, rows, config, seed);
}

NetworkClassifier::NetworkClassifier(Encoder encoder, NetworkModel model)
    : encoder_(std::move(encoder)), model_(std::move(model)) {
  if (model_.inputs() != encoder_.input_width() || model_.outputs() != encoder_.target_width()) {
    throw std::invalid_argument("network dimensions do not match the encoder");
  }
}

std::vector<double> NetworkClassifier::predict(const Example& example) const {
  std::vector<double> x(encoder_.input_width());
  encoder_.encode_inputs(example, x);
  auto o = model_.forward(x);
  if (o.size() == 1) return {1.0 - o[0], o[0]};
  return o;
}

void NetworkClassifier::dump(std::ostream& out) const { model_.dump(out); }

std::shared_ptr<const Classifier> NetworkLearner::fit(const Dataset& train,
                                                      std::span<const std::size_t> rows,
                                                      std::uint64_t seed) const {
  Encoder encoder(train.shared_schema(), NormalizationStats::from(train));
  const EncodedSet encoded = encode(train, encoder);
  auto model = train_network(encoded, rows, config_, seed);
  return std::make_shared<NetworkClassifier>(std::move(encoder), std::move(model));
}

}  // namespace ensbench
