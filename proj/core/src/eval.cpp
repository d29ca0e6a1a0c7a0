// SPDX-License-Identifier: Apache-2.0
#include "mmblock/eval.hpp"

#include <cmath>
#include <string>

#include "mmblock/errors.hpp"
#include "mmblock/seed.hpp"
#include "mmblock/train.hpp"

namespace mmblock::eval {

double top1_accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw DataError("top1_accuracy: empty input");
  if (predictions.size() != labels.size()) throw DataError("top1_accuracy: length mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hit += predictions[i] == labels[i];
  return static_cast<double>(hit) / static_cast<double>(predictions.size());
}

MaeStd mae_std(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.empty()) throw DataError("mae_std: empty input");
  if (predictions.size() != targets.size()) throw DataError("mae_std: length mismatch");
  const auto n = static_cast<double>(predictions.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += std::abs(targets[i] - predictions[i]);
  const double mae = sum / n;
  double ss = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double d = std::abs(targets[i] - predictions[i]) - mae;
    ss += d * d;
  }
  return {mae, std::sqrt(ss / n)};
}

P1Metrics evaluate_p1(const nn::GruModel& model, const data::P1Dataset& validation) {
  const auto pred = nn::predict_p1_batch(model, nn::window_matrix(validation));
  std::vector<int> labels;
  labels.reserve(validation.size());
  for (const auto& p : validation.points) labels.push_back(p.label);
  return {validation.horizon, top1_accuracy(pred, labels), static_cast<int>(labels.size())};
}

P2Metrics evaluate_p2(const nn::GruModel& model, const data::P2Dataset& validation) {
  const auto pred = nn::predict_p2_batch(model, nn::window_matrix(validation));
  std::vector<double> targets;
  targets.reserve(validation.size());
  for (const auto& p : validation.points) targets.push_back(p.target);
  const auto m = mae_std(pred, targets);
  return {validation.horizon, m.mae, m.stddev, static_cast<int>(targets.size())};
}

void SweepConfig::validate() const {
  if (horizon_min < 1 || horizon_max < horizon_min)
    throw ConfigError("sweep: horizon range must satisfy 1 <= min <= max");
  if (observation < 1) throw ConfigError("sweep: observation must be >= 1");
  if (drop_rates.empty()) throw ConfigError("sweep: no drop rates");
  for (int r : drop_rates)
    if (r < 1) throw ConfigError("sweep: drop rates must be >= 1");
  if (!(train_fraction > 0 && train_fraction < 1))
    throw ConfigError("sweep: train_fraction must lie in (0, 1)");
  if (model.seq_len != observation) throw ConfigError("sweep: model seq_len != observation");
  model.validate();
}

SweepSeeds sweep_seeds(std::uint64_t master_seed) {
  return {derive_seed(master_seed, "dataset", {}), derive_seed(master_seed, "split", {}),
          derive_seed(master_seed, "train-p1", {}), derive_seed(master_seed, "train-p2", {})};
}

P1Metrics sweep_point_p1(std::span<const data::RawSequencePair> augmented, int horizon,
                         const SweepConfig& config) {
  const auto seeds = sweep_seeds(config.master_seed);
  const auto ds = data::build_p1_dataset(augmented, config.observation, horizon, seeds.dataset);
  auto [train, val] = data::split(ds, config.train_fraction, seeds.split);
  data::standardize_splits(train, val);
  nn::ModelConfig mc = config.model;
  mc.seed = seeds.train_p1;
  const auto result = nn::train(train, nullptr, mc);
  return evaluate_p1(result.model, val);
}

P2Metrics sweep_point_p2(std::span<const data::RawSequencePair> augmented, int horizon,
                         const SweepConfig& config) {
  const auto seeds = sweep_seeds(config.master_seed);
  const auto ds = data::build_p2_dataset(augmented, config.observation, horizon, seeds.dataset);
  auto [train, val] = data::split(ds, config.train_fraction, seeds.split);
  data::standardize_splits(train, val);
  nn::ModelConfig mc = config.model;
  mc.seed = seeds.train_p2;
  const auto result = nn::train(train, nullptr, mc);
  return evaluate_p2(result.model, val);
}

SweepResult sweep(std::span<const data::RawSequencePair> campaign, const SweepConfig& config,
                  const SweepProgress& progress) {
  config.validate();
  if (campaign.empty()) throw DataError("sweep: empty campaign");
  const auto augmented = data::augment_campaign(campaign, config.drop_rates);

  RunMetadata meta;
  meta.master_seed = config.master_seed;
  meta.epochs = config.model.epochs;
  meta.observation = config.observation;
  meta.drop_rates = config.drop_rates;
  meta.train_fraction = config.train_fraction;
  meta.num_raw_pairs = static_cast<int>(campaign.size());

  SweepResult out;
  out.p1.metadata = meta;
  out.p2.metadata = meta;
  for (int tp = config.horizon_min; tp <= config.horizon_max; ++tp) {
    try {
      out.p1.rows.push_back(sweep_point_p1(augmented, tp, config));
      out.p2.rows.push_back(sweep_point_p2(augmented, tp, config));
    } catch (const DivergenceError&) {
      throw;
    } catch (const Error& e) {
      throw DataError("sweep at T_P=" + std::to_string(tp) + ": " + e.what());
    }
    if (progress) {
      const auto& a = out.p1.rows.back();
      const auto& b = out.p2.rows.back();
      progress("T_P=" + std::to_string(tp) + " accuracy=" + std::to_string(a.top1_accuracy) +
               " mae=" + std::to_string(b.mae) + " std=" + std::to_string(b.stddev));
    }
  }
  return out;
}

std::vector<double> moving_average(std::span<const double> values, int width) {
  if (width < 1) throw DomainError("moving_average: width must be >= 1");
  std::vector<double> out;
  const auto w = static_cast<std::size_t>(width);
  if (values.size() < w) return out;
  for (std::size_t i = 0; i + w <= values.size(); ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < w; ++k) s += values[i + k];
    out.push_back(s / static_cast<double>(width));
  }
  return out;
}

}  // namespace mmblock::eval
