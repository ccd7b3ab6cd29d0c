#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mghga/errors.hpp"
#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"
#include "oracle.hpp"

using namespace mghga;

namespace {

struct Instance {
  FeatureMatrix x;
  NormalizedOperator op;
  ModelParams params;
  LabelData labels;
};

Instance make_instance(std::uint64_t seed, std::size_t n, std::size_t d, std::size_t h, std::size_t c) {
  std::mt19937_64 rng(seed);
  auto x = oracle::random_features(n, d, rng, false);
  auto op = normalized_operator(build_knn_hypergraph(x, 3));
  ModelParams p{oracle::random_matrix(d, h, rng), oracle::random_matrix(h, c, rng)};
  return {std::move(x), std::move(op), std::move(p), oracle::random_labels(n, c, rng)};
}

LabelData one_train_node(int label, std::size_t c) {
  return LabelData{{label}, {1}, {0}, c};
}

}  // namespace

TEST(Forward, ZeroTheta2GivesUniformRows) {
  auto in = make_instance(1, 6, 3, 2, 4);
  in.params.theta2 = Matrix(2, 4, 0.0);
  const Matrix z = forward(in.op, in.x, in.params);
  for (double v : z.values()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, SingleNodeRowSumsToOne) {
  const NormalizedOperator op = normalized_operator(Hypergraph(1, {{0}}));
  const FeatureMatrix x(Matrix::from_rows({{0.3, -1.2, 2.0}}));
  std::mt19937_64 rng(2);
  const ModelParams p{oracle::random_matrix(3, 2, rng), oracle::random_matrix(2, 3, rng)};
  const Matrix z = forward(op, x, p);
  EXPECT_NEAR(z(0, 0) + z(0, 1) + z(0, 2), 1.0, 1e-15);
}

TEST(Forward, MatchesLayerByLayerOracle) {
  const auto in = make_instance(3, 4, 3, 2, 2);
  const auto ref = oracle::forward(oracle::from(in.op.dense()), oracle::from(in.x.values()),
                                   oracle::from(in.params.theta1), oracle::from(in.params.theta2));
  EXPECT_LT(oracle::max_abs(ref.z, forward(in.op, in.x, in.params)), 1e-12);
}

TEST(Loss, Examples) {
  EXPECT_NEAR(loss(Matrix::from_rows({{0.5, 0.5}}), one_train_node(1, 2)), std::log(2.0), 1e-15);
  const LabelData l{{0, 1, 1}, {1, 1, 0}, {0, 0, 1}, 2};
  EXPECT_EQ(loss(Matrix::from_rows({{1, 0}, {0, 1}, {0.5, 0.5}}), l), 0.0);

  std::mt19937_64 rng(4);
  const auto labels = oracle::random_labels(12, 3, rng);
  Matrix z(12, 3);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (std::size_t i = 0; i < 12; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < 3; ++k) s += (z(i, k) = u(rng));
    for (std::size_t k = 0; k < 3; ++k) z(i, k) /= s;
  }
  EXPECT_NEAR(loss(z, labels), oracle::loss(oracle::from(z), labels), 1e-12);
}

TEST(Predict, Examples) {
  EXPECT_EQ(predict(Matrix::from_rows({{0.1, 0.7, 0.2}})), std::vector<int>{1});
  EXPECT_EQ(predict(Matrix::from_rows({{0.5, 0.5}})), std::vector<int>{0});
  std::mt19937_64 rng(5);
  const Matrix z = oracle::random_matrix(20, 4, rng);
  const auto p = predict(z);
  for (std::size_t i = 0; i < 20; ++i) {
    int best = 0;
    for (int k = 1; k < 4; ++k)
      if (z(i, k) > z(i, best)) best = k;
    EXPECT_EQ(p[i], best);
  }
}

TEST(Accuracy, Examples) {
  LabelData l;
  l.n_classes = 3;
  for (int i = 0; i < 10; ++i) {
    l.labels.push_back(i % 3);
    l.train_mask.push_back(0);
    l.test_mask.push_back(1);
  }
  std::vector<int> shifted, half = l.labels;
  for (int y : l.labels) shifted.push_back((y + 1) % 3);
  for (int i = 0; i < 5; ++i) half[i] = (half[i] + 1) % 3;
  EXPECT_EQ(accuracy(l.labels, l, Split::test), 1.0);
  EXPECT_EQ(accuracy(shifted, l, Split::test), 0.0);
  EXPECT_EQ(accuracy(half, l, Split::test), 0.5);
}

TEST(Train, SeparableToyFitsTrainingSet) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> g(0.0, 0.3);
  Matrix m(20, 2);
  LabelData l;
  l.n_classes = 2;
  for (std::size_t i = 0; i < 20; ++i) {
    const int y = i < 10 ? 0 : 1;
    m(i, 0) = (y == 0 ? -3.0 : 3.0) + g(rng);
    m(i, 1) = (y == 0 ? -3.0 : 3.0) + g(rng);
    l.labels.push_back(y);
    l.train_mask.push_back(1);
    l.test_mask.push_back(0);
  }
  const FeatureMatrix x(std::move(m));
  const auto op = normalized_operator(build_knn_hypergraph(x, 1));
  TrainConfig cfg;
  cfg.learning_rate = 0.01;
  cfg.hidden_dim = 16;
  cfg.seed = 1;
  const ModelParams p = train(op, x, l, cfg);
  EXPECT_GE(accuracy(predict(forward(op, x, p)), l, Split::train), 0.95);
}

TEST(Train, ZeroEpochsReturnsInitialisation) {
  const auto in = make_instance(7, 10, 4, 3, 2);
  TrainConfig cfg;
  cfg.epochs = 0;
  cfg.hidden_dim = 3;
  cfg.seed = 42;
  EXPECT_EQ(train(in.op, in.x, in.labels, cfg), init_params(4, 3, 2, 42));
}

TEST(Train, DeterministicForSeed) {
  const auto in = make_instance(8, 15, 5, 4, 3);
  TrainConfig cfg;
  cfg.epochs = 40;
  cfg.hidden_dim = 4;
  cfg.seed = 9;
  std::vector<double> t1, t2;
  const auto a = train(in.op, in.x, in.labels, cfg, &t1);
  const auto b = train(in.op, in.x, in.labels, cfg, &t2);
  EXPECT_EQ(a, b);
  EXPECT_EQ(t1, t2);
  for (double v : t1) EXPECT_TRUE(std::isfinite(v));
}

TEST(Train, RejectsBadConfig) {
  TrainConfig cfg;
  cfg.dropout_rate = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST(Gradients, MatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto in = make_instance(100 + seed, 12, 5, 3, 3);
    const auto hh = oracle::from(in.op.dense());
    const auto x = oracle::from(in.x.values());
    const auto t1 = oracle::from(in.params.theta1);
    const auto t2 = oracle::from(in.params.theta2);
    const auto& l = in.labels;

    const auto nx = oracle::numeric_gradient(x, [&](const oracle::Dense& v) { return oracle::loss(hh, v, t1, t2, l); });
    const auto n1 = oracle::numeric_gradient(t1, [&](const oracle::Dense& v) { return oracle::loss(hh, x, v, t2, l); });
    const auto n2 = oracle::numeric_gradient(t2, [&](const oracle::Dense& v) { return oracle::loss(hh, x, t1, v, l); });
    const auto gp = grad_params(in.op, in.x, in.params, l);
    EXPECT_LT(oracle::max_relative_error(grad_features(in.op, in.x, in.params, l), nx), 1e-4);
    EXPECT_LT(oracle::max_relative_error(gp.theta1, n1), 1e-4);
    EXPECT_LT(oracle::max_relative_error(gp.theta2, n2), 1e-4);
    EXPECT_LT(oracle::max_abs(oracle::grad_x(hh, x, t1, t2, l), grad_features(in.op, in.x, in.params, l)), 1e-12);
  }
}

TEST(Gradients, ZeroTheta2GivesZeroFeatureGradient) {
  auto in = make_instance(11, 8, 3, 2, 2);
  in.params.theta2 = Matrix(2, 2, 0.0);
  EXPECT_EQ(grad_features(in.op, in.x, in.params, in.labels), Matrix(8, 3, 0.0));
}

TEST(Gradients, InactiveHiddenUnitHasZeroBlock) {
  auto in = make_instance(12, 8, 3, 3, 2);
  // Features are non-negative; a non-positive column of theta1 keeps unit 1 off.
  for (std::size_t r = 0; r < 3; ++r) in.params.theta1(r, 1) = -std::abs(in.params.theta1(r, 1)) - 0.1;
  in.params.theta2(1, 0) = in.params.theta2(1, 1) = 0.0;
  const auto g = grad_params(in.op, in.x, in.params, in.labels);
  for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(g.theta1(r, 1), 0.0);
  EXPECT_EQ(g.theta2(1, 0), 0.0);
  EXPECT_EQ(g.theta2(1, 1), 0.0);
}

// The loss is a sum over training nodes, so gradients add across any
// partition of the training set.
TEST(Gradients, AdditiveOverTrainingNodes) {
  const auto in = make_instance(13, 10, 4, 3, 2);
  LabelData a = in.labels, b = in.labels;
  bool flip = false;
  for (std::size_t u = 0; u < in.labels.size(); ++u) {
    if (!in.labels.train_mask[u]) continue;
    (flip ? a : b).train_mask[u] = 0;
    flip = !flip;
  }
  const auto g = grad_params(in.op, in.x, in.params, in.labels);
  const auto ga = grad_params(in.op, in.x, in.params, a);
  const auto gb = grad_params(in.op, in.x, in.params, b);
  for (std::size_t i = 0; i < g.theta2.size(); ++i)
    EXPECT_NEAR(g.theta2.data()[i], ga.theta2.data()[i] + gb.theta2.data()[i], 1e-12);
  const auto fx = grad_features(in.op, in.x, in.params, in.labels);
  const auto fa = grad_features(in.op, in.x, in.params, a);
  const auto fb = grad_features(in.op, in.x, in.params, b);
  for (std::size_t i = 0; i < fx.size(); ++i) EXPECT_NEAR(fx.data()[i], fa.data()[i] + fb.data()[i], 1e-12);
}

TEST(Gradients, Theta2ColumnScalingKeepsArgmax) {
  auto in = make_instance(14, 10, 4, 3, 3);
  for (double& v : in.params.theta2.values()) v *= 0.1;  // keep softmax away from saturation
  auto argmax = [](const Matrix& f) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < f.size(); ++i)
      if (std::abs(f.data()[i]) > std::abs(f.data()[best])) best = i;
    return best;
  };
  const auto before = argmax(grad_features(in.op, in.x, in.params, in.labels));
  ModelParams scaled = in.params;
  for (double& v : scaled.theta2.values()) v *= 1.2;
  EXPECT_EQ(argmax(grad_features(in.op, in.x, scaled, in.labels)), before);
}

TEST(Dropout, MaskIsInvertedAndSeeded) {
  Rng a(1), b(1);
  Dropout da(0.5, a), db(0.5, b);
  const Matrix m = da.sample_mask(50, 8);
  EXPECT_EQ(m, db.sample_mask(50, 8));
  for (double v : m.values()) EXPECT_TRUE(v == 0.0 || v == 2.0);
}
