#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "ensbench/dataset.hpp"
#include "ensbench/encoding.hpp"
#include "ensbench/network.hpp"
#include "ensbench/random.hpp"

using namespace ensbench;

namespace {

EncodedSet make_set(std::size_t inputs, std::size_t targets) { return EncodedSet(inputs, targets); }

EncodedSet xor_set() {
  EncodedSet s = make_set(2, 1);
  const double pts[4][3] = {{0, 0, 0}, {0, 1, 1}, {1, 0, 1}, {1, 1, 0}};
  for (const auto& p : pts) {
    const double x[2] = {p[0], p[1]};
    const double t[1] = {p[2]};
    s.push_back(x, t, static_cast<std::size_t>(p[2]));
  }
  return s;
}

std::size_t train_errors(const NetworkModel& m, const EncodedSet& s) {
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto o = m.forward(s.inputs(i));
    const std::size_t predicted = o.size() == 1 ? (o[0] > 0.5 ? 1 : 0)
                                                : static_cast<std::size_t>(
                                                      std::max_element(o.begin(), o.end()) - o.begin());
    wrong += predicted != s.label(i);
  }
  return wrong;
}

}  // namespace

TEST(NetworkConfig, Validation) {
  NetworkConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.learning_rate = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.momentum = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(LookupConfig, NamedPresets) {
  const auto bc = lookup_network_config("breast-cancer-w", 9, 1, 699);
  EXPECT_EQ(bc.hidden_units, 5u);
  EXPECT_EQ(bc.epochs, 20u);
  const auto letter = lookup_network_config("letter", 16, 26, 20000);
  EXPECT_EQ(letter.hidden_units, 40u);
  EXPECT_EQ(letter.epochs, 30u);
  EXPECT_DOUBLE_EQ(letter.learning_rate, 0.15);
  EXPECT_DOUBLE_EQ(letter.momentum, 0.9);
}

TEST(LookupConfig, FallbackRule) {
  const auto c = lookup_network_config("unknown", 120, 3, 100);
  EXPECT_EQ(c.hidden_units, 12u);
  EXPECT_EQ(c.epochs, 70u);
  EXPECT_EQ(lookup_network_config("unknown", 10, 2, 250).epochs, 40u);
  EXPECT_EQ(lookup_network_config("unknown", 10, 2, 500).epochs, 40u);
  EXPECT_EQ(lookup_network_config("unknown", 10, 2, 501).epochs, 30u);
  EXPECT_EQ(lookup_network_config("unknown", 10, 9, 501).hidden_units, 9u);
  EXPECT_EQ(lookup_network_config("unknown", 4, 1, 10).hidden_units, 5u);
}

TEST(NetworkModel, ZeroWeightsGiveHalf) {
  for (std::size_t hidden : {0u, 3u}) {
    const NetworkModel m(4, hidden, 3);
    for (double o : m.forward(std::vector<double>{0.1, 0.9, 0.3, 1.0})) EXPECT_DOUBLE_EQ(o, 0.5);
  }
}

TEST(NetworkModel, RandomInitWithinHalfRange) {
  const auto m = NetworkModel::random(7, 4, 2, 0.5, 3);
  EXPECT_EQ(m.parameter_count(), 4u * 8 + 2 * 5);
  for (double w : m.parameters()) {
    EXPECT_GE(w, -0.5);
    EXPECT_LE(w, 0.5);
  }
}

TEST(NetworkModel, GradientMatchesCentralDifferences) {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t in = 1 + rng.index(5), hid = rng.index(5), out = 1 + rng.index(3);
    auto m = NetworkModel::random(in, hid, out, 1.0, rng.next());
    std::vector<double> x(in), t(out);
    for (double& v : x) v = rng.uniform();
    for (double& v : t) v = rng.index(2);
    std::vector<double> g(m.parameter_count());
    m.gradient(x, t, g);
    const double h = 1e-4;
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto p = m.parameters();
      const double saved = p[i];
      p[i] = saved + h;
      const double up = m.squared_error(x, t);
      p[i] = saved - h;
      const double down = m.squared_error(x, t);
      p[i] = saved;
      const double numeric = (up - down) / (2 * h);
      const double scale = std::max({std::abs(numeric), std::abs(g[i]), 1e-6});
      EXPECT_LE(std::abs(numeric - g[i]) / scale, 1e-3) << "trial " << trial << " param " << i;
    }
  }
}

TEST(TrainNetwork, OneEpochOnOneExampleReducesError) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    EncodedSet s = make_set(3, 1);
    const double x[3] = {0.2, 0.7, 0.4};
    const double t[1] = {1.0};
    s.push_back(x, t, 1);
    NetworkConfig c;
    c.epochs = 1;
    const auto initial = NetworkModel::random(3, c.hidden_units, 1, 0.5, derive_seed(seed, {purpose::init}));
    const auto trained = train_network(s, c, seed);
    EXPECT_LT(trained.squared_error(x, t), initial.squared_error(x, t));
  }
}

TEST(TrainNetwork, ZeroStartHook) {
  EncodedSet s = xor_set();
  NetworkConfig c;
  c.epochs = 1;
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const auto m = train_network(s, rows, c, 1, NetworkModel(2, 5, 1));
  EXPECT_EQ(m.parameter_count(), NetworkModel(2, 5, 1).parameter_count());
}

TEST(TrainNetwork, DimensionMismatchIsAnError) {
  EncodedSet s = xor_set();
  const std::vector<std::size_t> rows{0, 1};
  EXPECT_THROW(train_network(s, rows, NetworkConfig{}, 1, NetworkModel(3, 5, 1)),
               std::invalid_argument);
}

TEST(TrainNetwork, Deterministic) {
  const EncodedSet s = xor_set();
  NetworkConfig c;
  c.epochs = 50;
  EXPECT_EQ(train_network(s, c, 9), train_network(s, c, 9));
  EXPECT_NE(train_network(s, c, 9), train_network(s, c, 10));
}

TEST(TrainNetwork, LearnsXor) {
  const EncodedSet s = xor_set();
  NetworkConfig c;
  c.hidden_units = 5;
  c.epochs = 2000;
  int solved = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) solved += train_errors(train_network(s, c, seed), s) == 0;
  EXPECT_GE(solved, 8);
}

TEST(TrainNetwork, PerceptronSeparatesMarginData) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed + 100);
    const double angle = rng.uniform(0.0, 6.283185307179586);
    const double nx = std::cos(angle), ny = std::sin(angle);
    EncodedSet s = make_set(2, 1);
    while (s.size() < 200) {
      const double a = rng.uniform(), b = rng.uniform();
      const double side = nx * (a - 0.5) + ny * (b - 0.5);
      if (std::abs(side) < 0.2) continue;
      const double x[2] = {a, b};
      const double t[1] = {side > 0 ? 1.0 : 0.0};
      s.push_back(x, t, side > 0 ? 1 : 0);
    }
    NetworkConfig c;
    c.hidden_units = 0;
    c.epochs = 50;
    const auto m = train_network(s, c, seed);
    EXPECT_LE(static_cast<double>(train_errors(m, s)) / s.size(), 0.05) << "seed " << seed;
  }
}

TEST(NetworkClassifier, BinaryScoresAndArgmax) {
  auto schema = std::make_shared<const Schema>(
      std::vector<Feature>{Feature{"a", FeatureKind::continuous, {}}},
      std::vector<std::string>{"p", "q"});
  const NetworkClassifier c(Encoder(schema, NormalizationStats({{0.0, 1.0}})), NetworkModel(1, 5, 1));
  const Example ex{{FeatureValue::real(0.3)}, 0};
  EXPECT_EQ(c.predict(ex), (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(c.classify(ex), 0u);
}

TEST(Argmax, TiesGoToLowestIndex) {
  EXPECT_EQ(argmax(std::vector<double>{0.1, 0.8, 0.3}), 1u);
  EXPECT_EQ(argmax(std::vector<double>{0.4, 0.4, 0.2}), 0u);
}

TEST(NetworkModel, DumpHasSeventeenDigits) {
  auto m = NetworkModel(1, 0, 1);
  m.parameters()[0] = 1.0 / 3.0;
  std::ostringstream out;
  m.dump(out);
  EXPECT_EQ(out.str(), "network inputs=1 hidden=0 outputs=1\n0.33333333333333331\n0\n");
}

TEST(NetworkLearner, FitUsesWholeTrainingSetForNormalization) {
  auto schema = std::make_shared<const Schema>(
      std::vector<Feature>{Feature{"a", FeatureKind::continuous, {}}},
      std::vector<std::string>{"p", "q"});
  std::vector<Example> ex;
  for (int i = 0; i < 10; ++i) ex.push_back({{FeatureValue::real(i)}, i < 5 ? 0u : 1u});
  const Dataset d("toy", schema, ex);
  NetworkConfig c;
  c.epochs = 5;
  const NetworkLearner learner(c);
  const std::vector<std::size_t> rows{0, 1, 2};
  const auto fitted = learner.fit(d, rows, 4);
  const auto& net = dynamic_cast<const NetworkClassifier&>(*fitted);
  EXPECT_DOUBLE_EQ(net.encoder().stats().ranges()[0].max, 9.0);
}
