// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "mmblock/dataset.hpp"
#include "mmblock/gru.hpp"

namespace mmblock::nn {

struct TrainHistory {
  std::vector<double> train_loss;
  /// Validation accuracy (classification) or MAE in instances (regression);
  /// NaN when no validation split was given.
  std::vector<double> validation_metric;

  std::size_t size() const noexcept { return train_loss.size(); }
};

struct TrainResult {
  GruModel model;
  TrainHistory history;
};

/// Adam state for every parameter block.
class Adam {
 public:
  explicit Adam(const GruModel& model, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  void step(GruModel& model, const Gradients& grads);

 private:
  double lr_, beta1_, beta2_, eps_;
  long long t_ = 0;
  std::vector<Eigen::VectorXd> m_, v_;
};

/// Optional per-epoch observer, e.g. for progress logging.
using EpochCallback = std::function<void(int epoch, double train_loss, double validation_metric)>;

/// Mini-batch Adam for config.epochs epochs, reshuffling each epoch.
/// Throws DivergenceError on a non-finite loss.
TrainResult train(const data::P1Dataset& train_set, const data::P1Dataset* validation,
                  ModelConfig config, const EpochCallback& on_epoch = {});
TrainResult train(const data::P2Dataset& train_set, const data::P2Dataset* validation,
                  ModelConfig config, const EpochCallback& on_epoch = {});

/// Stacks the windows of a dataset column-wise (seq_len x N).
Eigen::MatrixXd window_matrix(const data::P1Dataset& ds);
Eigen::MatrixXd window_matrix(const data::P2Dataset& ds);

}  // namespace mmblock::nn
