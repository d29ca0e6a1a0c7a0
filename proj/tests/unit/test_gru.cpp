// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gradcheck.hpp"
#include "mmblock/errors.hpp"
#include "mmblock/gru.hpp"
#include "oracles.hpp"

using namespace mmblock;
using namespace mmblock::nn;

namespace {

ModelConfig small_config(Task task, int hidden = 4, int steps = 6) {
  ModelConfig c;
  c.task = task;
  c.hidden = hidden;
  c.seq_len = steps;
  c.seed = 11;
  return c;
}

Eigen::MatrixXd random_inputs(int steps, int batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x(steps, batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

}  // namespace

TEST(GruCell, ZeroInputZeroStateIsFixedPointWithZeroBiases) {
  const auto model = GruModel::initialize(small_config(Task::classify));
  const auto s = gru_cell(0.0, Eigen::VectorXd::Zero(4), model.gru);
  EXPECT_TRUE(s.h.isZero(0.0));
}

TEST(GruCell, ZeroWeightsHalveThePreviousState) {
  const auto p = GruParams::zeros(1, 3);
  const Eigen::Vector3d v(0.4, -2.0, 1.0);
  const auto s = gru_cell(0.7, v, p);
  // z = 0.5 and candidate = tanh(0) = 0.
  EXPECT_TRUE(s.h.isApprox(0.5 * v, 1e-15));
  EXPECT_TRUE(s.z.isApprox(Eigen::Vector3d::Constant(0.5), 1e-15));
}

TEST(GruCell, StateStaysBounded) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 3.0);
  auto model = GruModel::initialize(small_config(Task::classify, 6));
  for (auto& blk : param_blocks(model.gru, model.head))
    for (Eigen::Index i = 0; i < blk.values.size(); ++i) blk.values[i] = n(rng);
  for (int trial = 0; trial < 500; ++trial) {
    Eigen::VectorXd h(6);
    for (auto& v : h) v = n(rng);
    const auto s = gru_cell(n(rng), h, model.gru);
    for (int i = 0; i < 6; ++i)
      ASSERT_LE(std::fabs(s.h[i]), std::max(std::fabs(h[i]), 1.0) + 1e-12);
  }
}

TEST(GruCell, RejectsSizeMismatch) {
  const auto p = GruParams::zeros(1, 3);
  EXPECT_THROW(gru_cell(0.0, Eigen::VectorXd::Zero(2), p), DataError);
}

TEST(Forward, EvalModeIsDeterministic) {
  const auto model = GruModel::initialize(small_config(Task::classify));
  const auto x = random_inputs(6, 5, 1);
  const auto a = forward(model, x, Mode::eval);
  const auto b = forward(model, x, Mode::eval);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.steps(), 6);
  EXPECT_EQ(a.h.size(), 7u);
  EXPECT_TRUE(a.h[0].isZero(0.0));
}

TEST(Forward, TrainModeReproducibleUnderSeed) {
  const auto model = GruModel::initialize(small_config(Task::regress));
  const auto x = random_inputs(6, 8, 2);
  std::mt19937_64 r1(9), r2(9);
  EXPECT_EQ(forward(model, x, Mode::train, &r1).output, forward(model, x, Mode::train, &r2).output);
}

TEST(Forward, ZeroModelGivesUniformSoftmax) {
  const auto model = GruModel::zeros(small_config(Task::classify));
  const std::vector<double> w(6, 1.5);
  const auto p = predict_p1(model, w);
  EXPECT_DOUBLE_EQ(p.probabilities[0], 0.5);
  EXPECT_DOUBLE_EQ(p.probabilities[1], 0.5);
  EXPECT_EQ(p.label, 0);
}

TEST(Forward, ConstantRegressionHeadPredictsHalfHorizon) {
  const int tp = 14;
  auto model = GruModel::zeros(small_config(Task::regress));
  model.target_scale = tp;
  model.head.b_out[0] = 0.5;
  const std::vector<double> w(6, -3.0);
  EXPECT_NEAR(predict_p2(model, w), tp / 2.0, 1e-12);
  const double scaled = 9.0 / model.target_scale;
  EXPECT_NEAR(scaled * model.target_scale, 9.0, 1e-12);
}

TEST(Forward, RejectsWrongWindowLengthAndTask) {
  const auto clf = GruModel::initialize(small_config(Task::classify));
  const std::vector<double> short_window(5, 0.0), window(6, 0.0);
  EXPECT_THROW(predict_p1(clf, short_window), DataError);
  EXPECT_THROW(predict_p2(clf, window), DataError);
  const auto reg = GruModel::initialize(small_config(Task::regress));
  EXPECT_THROW(predict_p1(reg, window), DataError);
}

TEST(Forward, NonFiniteInputRaises) {
  const auto model = GruModel::initialize(small_config(Task::classify));
  std::vector<double> w(6, 0.0);
  w[2] = std::nan("");
  EXPECT_THROW(forward(model, w, Mode::eval), NumericError);
}

TEST(Dropout, MonteCarloMeanMatchesEvalActivation) {
  auto cfg = small_config(Task::classify, 8, 5);
  const auto model = GruModel::initialize(cfg);
  const int masks = 100000;
  Eigen::MatrixXd x = random_inputs(5, 1, 4).replicate(1, masks);
  std::mt19937_64 rng(12);
  const auto train = forward(model, x, Mode::train, &rng);
  const auto eval = forward(model, x.leftCols(1), Mode::eval);
  const Eigen::VectorXd mean = train.dropped.rowwise().mean();
  const Eigen::VectorXd h = eval.dropped.col(0);
  for (int i = 0; i < 8; ++i) {
    if (std::fabs(h[i]) < 1e-3) continue;
    EXPECT_LT(std::fabs(mean[i] - h[i]) / std::fabs(h[i]), 0.01) << i;
  }
  EXPECT_TRUE(eval.mask.isOnes(0.0));
}

TEST(Losses, CrossEntropyExamples) {
  EXPECT_NEAR(cross_entropy_loss(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy_loss(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 1)), std::log(2.0), 1e-15);
  EXPECT_NEAR(cross_entropy_loss(Eigen::Vector2d(800, -800), Eigen::Vector2d(1, 0)), 0.0, 1e-300);
  const double big = cross_entropy_loss(Eigen::Vector2d(800, -800), Eigen::Vector2d(0, 1));
  EXPECT_TRUE(std::isfinite(big));
  EXPECT_NEAR(big, 1600.0, 1e-9);
}

TEST(Losses, CrossEntropyMatchesNaiveFormula) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 2000; ++i) {
    const double z0 = u(rng), z1 = u(rng);
    const double p0 = (i % 2 == 0) ? 1.0 : 0.0;
    const double ce = cross_entropy_loss(Eigen::Vector2d(z0, z1), Eigen::Vector2d(p0, 1 - p0));
    ASSERT_NEAR(ce, oracle::naive_cross_entropy(z0, z1, p0, 1 - p0), 1e-10);
    ASSERT_GE(ce, 0.0);
  }
}

TEST(Losses, MseExamples) {
  EXPECT_EQ(mse_loss(4.0, 4.0), 0.0);
  EXPECT_EQ(mse_loss(3.0, 5.0), 4.0);
  EXPECT_EQ(mse_loss(-1.25, 7.5), mse_loss(7.5, -1.25));
  Eigen::MatrixXd pred(1, 2);
  pred << 1.0, 2.0;
  const std::vector<double> t{2.0, 4.0};
  const auto lg = mse_batch(pred, t);
  EXPECT_DOUBLE_EQ(lg.loss, 2.5);
  EXPECT_DOUBLE_EQ(lg.grad(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(lg.grad(0, 1), -2.0);
}

TEST(Softmax, NormalizedAndInOpenUnitInterval) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-15.0, 15.0);
  for (int i = 0; i < 1000; ++i) {
    const auto p = softmax(Eigen::Vector2d(u(rng), u(rng)));
    ASSERT_NEAR(p.sum(), 1.0, 1e-12);
    ASSERT_GT(p.minCoeff(), 0.0);
    ASSERT_LT(p.maxCoeff(), 1.0);
  }
}

TEST(Predict, ArgmaxAndTieRule) {
  EXPECT_EQ(label_from_logits(2.0, -1.0), 0);
  EXPECT_EQ(label_from_logits(-1.0, 2.0), 1);
  EXPECT_EQ(label_from_logits(0.25, 0.25), 0);
}

TEST(Backward, ZeroUpstreamGradientGivesZeroGradients) {
  const auto model = GruModel::initialize(small_config(Task::classify));
  const auto x = random_inputs(6, 4, 5);
  const auto cache = forward(model, x, Mode::eval);
  const auto g = backward(model, cache, Eigen::MatrixXd::Zero(2, 4));
  for (const auto& blk : param_blocks(g.gru, g.head)) EXPECT_TRUE(blk.values.isZero(0.0)) << blk.name;
}

TEST(Backward, MaskedUnitsGetNoHeadGradient) {
  const auto cfg = small_config(Task::classify, 4, 6);
  const auto model = GruModel::initialize(cfg);
  const auto x = random_inputs(6, 1, 7);
  Eigen::MatrixXd mask(4, 1);
  mask << 1.25, 0.0, 1.25, 0.0;
  const auto cache = forward_with_mask(model, x, mask);
  const std::vector<int> label{1};
  const auto lg = cross_entropy_batch(cache.output, label);
  const auto g = backward(model, cache, lg.grad);
  EXPECT_TRUE(g.head.W_out.col(1).isZero(0.0));
  EXPECT_TRUE(g.head.W_out.col(3).isZero(0.0));
  EXPECT_FALSE(g.head.W_out.col(0).isZero(0.0));
}

TEST(Backward, RejectsMismatchedCache) {
  const auto model = GruModel::initialize(small_config(Task::classify));
  const auto other = GruModel::initialize(small_config(Task::classify, 5));
  const auto cache = forward(other, random_inputs(6, 2, 1), Mode::eval);
  EXPECT_THROW(backward(model, cache, Eigen::MatrixXd::Zero(2, 2)), DataError);
}

class GradientCheck : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(GradientCheck, ClassificationHead) {
  const auto r = mmblock::testing::gradient_check(Task::classify, GetParam());
  EXPECT_GT(r.checked, 0);
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst_param;
}

TEST_P(GradientCheck, RegressionHead) {
  const auto r = mmblock::testing::gradient_check(Task::regress, GetParam());
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst_param;
}

INSTANTIATE_TEST_SUITE_P(Seeds, GradientCheck, ::testing::Values(1u, 2u, 3u, 4u, 5u));
