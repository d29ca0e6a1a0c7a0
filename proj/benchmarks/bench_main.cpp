// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <random>

#include "mmblock/channel_sim.hpp"
#include "mmblock/dataset.hpp"
#include "mmblock/gru.hpp"

using namespace mmblock;

namespace {

Eigen::MatrixXd random_batch(int steps, int batch) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd x(steps, batch);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = n(rng);
  return x;
}

void BM_GruForwardEval(benchmark::State& state) {
  nn::ModelConfig cfg;
  const auto model = nn::GruModel::initialize(cfg);
  const auto x = random_batch(cfg.seq_len, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nn::forward(model, x, nn::Mode::eval).output.data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GruForwardEval)->Arg(1)->Arg(32)->Arg(256);

void BM_GruTrainStep(benchmark::State& state) {
  nn::ModelConfig cfg;
  const auto model = nn::GruModel::initialize(cfg);
  const int batch = static_cast<int>(state.range(0));
  const auto x = random_batch(cfg.seq_len, batch);
  std::vector<int> labels(static_cast<std::size_t>(batch));
  for (int i = 0; i < batch; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  std::mt19937_64 rng(3);
  for (auto _ : state) {
    const auto cache = nn::forward(model, x, nn::Mode::train, &rng);
    const auto lg = nn::cross_entropy_batch(cache.output, labels);
    auto grads = nn::backward(model, cache, lg.grad);
    benchmark::DoNotOptimize(grads.head.W_out.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_GruTrainStep)->Arg(32);

void BM_SimulateTrajectory(benchmark::State& state) {
  const channel::ScenarioConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(channel::simulate_trajectory(cfg).power.data());
}
BENCHMARK(BM_SimulateTrajectory)->Unit(benchmark::kMillisecond);

void BM_BuildP1Dataset(benchmark::State& state) {
  const channel::ScenarioConfig base;
  std::vector<channel::RawSequencePair> pairs;
  for (int i = 0; i < 20; ++i) {
    auto c = base;
    c.seed = base.seed + static_cast<std::uint64_t>(i);
    pairs.push_back(channel::simulate_trajectory(c));
    pairs.back().meta.run_id = i;
  }
  for (auto _ : state)
    benchmark::DoNotOptimize(data::build_p1_dataset(pairs, 10, 20, 5).points.data());
}
BENCHMARK(BM_BuildP1Dataset)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
