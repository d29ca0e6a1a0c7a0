// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmblock/dataset.hpp"
#include "mmblock/gru.hpp"

namespace mmblock::eval {

/// Fraction of exact matches.
double top1_accuracy(std::span<const int> predictions, std::span<const int> labels);

struct MaeStd {
  double mae = 0.0;
  double stddev = 0.0;  // population (divisor n) std of the absolute errors
};

MaeStd mae_std(std::span<const double> predictions, std::span<const double> targets);

struct P1Metrics {
  int horizon = 0;
  double top1_accuracy = 0.0;
  int num_samples = 0;
  friend bool operator==(const P1Metrics&, const P1Metrics&) = default;
};

struct P2Metrics {
  int horizon = 0;
  double mae = 0.0;
  double stddev = 0.0;
  int num_samples = 0;
  friend bool operator==(const P2Metrics&, const P2Metrics&) = default;
};

P1Metrics evaluate_p1(const nn::GruModel& model, const data::P1Dataset& validation);
P2Metrics evaluate_p2(const nn::GruModel& model, const data::P2Dataset& validation);

struct SweepConfig {
  int horizon_min = 1;
  int horizon_max = data::kMaxHorizon;
  int observation = data::kDefaultObservation;
  std::vector<int> drop_rates{1, 2, 3, 4};
  double train_fraction = 0.8;
  nn::ModelConfig model;
  std::uint64_t master_seed = 2021;

  void validate() const;
  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

/// Seeds used by every horizon of a sweep. They do not depend on T_P so
/// that neighbouring horizons share pair placements, splits and model
/// initialisation (common random numbers).
struct SweepSeeds {
  std::uint64_t dataset;
  std::uint64_t split;
  std::uint64_t train_p1;
  std::uint64_t train_p2;
};
SweepSeeds sweep_seeds(std::uint64_t master_seed);

struct RunMetadata {
  std::uint64_t master_seed = 0;
  int epochs = 0;
  int observation = 0;
  std::vector<int> drop_rates;
  double train_fraction = 0.0;
  int num_raw_pairs = 0;
  /// Resolved configuration echo (JSON text).
  std::string config;
  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

template <class Row>
struct EvalReport {
  std::vector<Row> rows;
  RunMetadata metadata;
  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

using P1Report = EvalReport<P1Metrics>;
using P2Report = EvalReport<P2Metrics>;

struct SweepResult {
  P1Report p1;
  P2Report p2;
};

using SweepProgress = std::function<void(const std::string& message)>;

/// Per horizon: build both datasets from the augmented campaign, split,
/// standardize on the training split, train from scratch and evaluate on
/// the validation split. `campaign` holds un-augmented raw pairs.
SweepResult sweep(std::span<const data::RawSequencePair> campaign, const SweepConfig& config,
                  const SweepProgress& progress = {});

/// One horizon of the sweep.
P1Metrics sweep_point_p1(std::span<const data::RawSequencePair> augmented, int horizon,
                         const SweepConfig& config);
P2Metrics sweep_point_p2(std::span<const data::RawSequencePair> augmented, int horizon,
                         const SweepConfig& config);

/// Moving average of width `width` over the fully covered positions.
std::vector<double> moving_average(std::span<const double> values, int width);

}  // namespace mmblock::eval
