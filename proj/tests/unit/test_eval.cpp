// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mmblock/errors.hpp"
#include "mmblock/eval.hpp"
#include "oracles.hpp"

using namespace mmblock;
using namespace mmblock::eval;

TEST(Top1Accuracy, Examples) {
  const std::vector<int> a{0, 1, 0}, b{0, 0, 0};
  EXPECT_DOUBLE_EQ(top1_accuracy(a, b), 2.0 / 3.0);
  EXPECT_EQ(top1_accuracy(a, a), 1.0);
}

TEST(Top1Accuracy, MatchesCountingOracle) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<int> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = static_cast<int>(rng() % 2);
      t[i] = static_cast<int>(rng() % 2);
    }
    ASSERT_NEAR(top1_accuracy(p, t), oracle::accuracy(p, t), 1e-12);
  }
}

TEST(Top1Accuracy, RejectsBadInput) {
  const std::vector<int> e, one{1}, two{1, 0};
  EXPECT_THROW(top1_accuracy(e, e), DataError);
  EXPECT_THROW(top1_accuracy(one, two), DataError);
}

TEST(MaeStd, Examples) {
  const std::vector<double> p{1.0, 5.0}, t{0.0, 2.0};
  const auto m = mae_std(p, t);
  EXPECT_DOUBLE_EQ(m.mae, 2.0);
  EXPECT_DOUBLE_EQ(m.stddev, 1.0);
  const std::vector<double> q{3.0, 4.0, 5.0}, u{1.0, 6.0, 3.0};
  const auto eq = mae_std(q, u);
  EXPECT_DOUBLE_EQ(eq.mae, 2.0);
  EXPECT_EQ(eq.stddev, 0.0);
}

TEST(MaeStd, MatchesTwoPassOracle) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-5.0, 45.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<double> p(n), t(n);
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = u(rng);
      t[i] = std::floor(u(rng));
    }
    const auto got = mae_std(p, t);
    const auto ref = oracle::abs_error_stats(p, t);
    ASSERT_NEAR(got.mae, ref.mean, 1e-12);
    ASSERT_NEAR(got.stddev, ref.stddev, 1e-12);
  }
}

TEST(MaeStd, RejectsBadInput) {
  const std::vector<double> e, one{1.0}, two{1.0, 2.0};
  EXPECT_THROW(mae_std(e, e), DataError);
  EXPECT_THROW(mae_std(one, two), DataError);
}

TEST(MovingAverage, CoversFullWindowsOnly) {
  const std::vector<double> v{1, 2, 3, 4, 5, 6};
  const auto m = moving_average(v, 5);
  ASSERT_EQ(m.size(), 2u);
  EXPECT_DOUBLE_EQ(m[0], 3.0);
  EXPECT_DOUBLE_EQ(m[1], 4.0);
  EXPECT_EQ(moving_average(v, 1), v);
  EXPECT_TRUE(moving_average(v, 7).empty());
  EXPECT_THROW(moving_average(v, 0), DomainError);
}

TEST(SweepSeeds, IndependentOfHorizonAndDistinct) {
  const auto a = sweep_seeds(2021);
  const auto b = sweep_seeds(2021);
  EXPECT_EQ(a.dataset, b.dataset);
  EXPECT_EQ(a.train_p2, b.train_p2);
  EXPECT_NE(a.dataset, a.split);
  EXPECT_NE(a.train_p1, a.train_p2);
  EXPECT_NE(sweep_seeds(2022).dataset, a.dataset);
}

TEST(SweepConfig, Validation) {
  SweepConfig c;
  EXPECT_NO_THROW(c.validate());
  c.horizon_min = 5;
  c.horizon_max = 4;
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.drop_rates.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = SweepConfig{};
  c.observation = 8;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Evaluate, ConstantModelsOnFixedData) {
  nn::ModelConfig cfg;
  cfg.hidden = 3;
  cfg.seq_len = 4;
  cfg.task = data::Task::classify;
  auto clf = nn::GruModel::zeros(cfg);
  clf.head.b_out << 0.0, 1.0;  // always predicts class 1
  data::P1Dataset v1;
  for (int i = 0; i < 4; ++i) {
    data::P1DataPoint p;
    p.window.values.assign(4, 0.1 * i);
    p.label = i < 3 ? 1 : 0;
    v1.points.push_back(p);
  }
  const auto m1 = evaluate_p1(clf, v1);
  EXPECT_DOUBLE_EQ(m1.top1_accuracy, 0.75);
  EXPECT_EQ(m1.num_samples, 4);

  cfg.task = data::Task::regress;
  auto reg = nn::GruModel::zeros(cfg);
  reg.target_scale = 10.0;
  reg.head.b_out[0] = 0.3;  // predicts 3
  data::P2Dataset v2;
  v2.horizon = 10;
  for (int target : {1, 5}) {
    data::P2DataPoint p;
    p.window.values.assign(4, 0.0);
    p.target = target;
    v2.points.push_back(p);
  }
  const auto m2 = evaluate_p2(reg, v2);
  EXPECT_NEAR(m2.mae, 2.0, 1e-12);
  EXPECT_NEAR(m2.stddev, 0.0, 1e-12);
  EXPECT_EQ(m2.num_samples, 2);
}
