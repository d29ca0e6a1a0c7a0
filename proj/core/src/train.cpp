// SPDX-License-Identifier: Apache-2.0
#include "mmblock/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "mmblock/errors.hpp"

namespace mmblock::nn {

namespace {

using Eigen::MatrixXd;

template <class D>
MatrixXd stack_windows(const D& ds) {
  if (ds.empty()) return MatrixXd(ds.observation, 0);
  const auto rows = static_cast<Eigen::Index>(ds.points.front().window.values.size());
  MatrixXd out(rows, static_cast<Eigen::Index>(ds.size()));
  for (std::size_t j = 0; j < ds.size(); ++j) {
    const auto& v = ds.points[j].window.values;
    if (static_cast<Eigen::Index>(v.size()) != rows) throw DataError("dataset windows differ in length");
    out.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Eigen::VectorXd>(v.data(), rows);
  }
  return out;
}

// Target encoding per task.
struct Targets {
  std::vector<int> labels;
  std::vector<double> values;
};

Targets targets_of(const data::P1Dataset& ds, double) {
  Targets t;
  for (const auto& p : ds.points) t.labels.push_back(p.label);
  return t;
}

Targets targets_of(const data::P2Dataset& ds, double scale) {
  Targets t;
  for (const auto& p : ds.points) t.values.push_back(p.target / scale);
  return t;
}

double validation_metric(const GruModel& model, const data::P1Dataset& val) {
  const auto pred = predict_p1_batch(model, window_matrix(val));
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == val.points[i].label;
  return static_cast<double>(hit) / static_cast<double>(pred.size());
}

double validation_metric(const GruModel& model, const data::P2Dataset& val) {
  const auto pred = predict_p2_batch(model, window_matrix(val));
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - val.points[i].target);
  return sum / static_cast<double>(pred.size());
}

template <class D>
TrainResult train_impl(const D& train_set, const D* validation, ModelConfig config, Task task,
                       double target_scale, const EpochCallback& on_epoch) {
  config.task = task;
  config.validate();
  if (train_set.empty()) throw DataError("train: empty training split");
  if (train_set.observation != config.seq_len)
    throw DataError("train: dataset observation length differs from model seq_len");

  TrainResult result{GruModel::initialize(config), {}};
  GruModel& model = result.model;
  model.target_scale = target_scale;

  const MatrixXd inputs = window_matrix(train_set);
  const Targets targets = targets_of(train_set, target_scale);
  const bool have_val = validation != nullptr && !validation->empty();

  const auto n = static_cast<std::size_t>(inputs.cols());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(config.seed ^ 0x5bd1e995ULL);
  Adam adam(model, config.learning_rate);

  const auto bs = static_cast<std::size_t>(config.batch_size);
  MatrixXd batch_in;
  std::vector<int> batch_labels;
  std::vector<double> batch_values;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += bs) {
      const std::size_t len = std::min(bs, n - start);
      batch_in.resize(inputs.rows(), static_cast<Eigen::Index>(len));
      batch_labels.clear();
      batch_values.clear();
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t idx = order[start + j];
        batch_in.col(static_cast<Eigen::Index>(j)) = inputs.col(static_cast<Eigen::Index>(idx));
        if (task == Task::classify) batch_labels.push_back(targets.labels[idx]);
        else batch_values.push_back(targets.values[idx]);
      }
      ForwardCache cache;
      try {
        cache = forward(model, batch_in, Mode::train, &rng);
      } catch (const NumericError& e) {
        throw DivergenceError(epoch, e.what());
      }
      const LossGrad lg = task == Task::classify ? cross_entropy_batch(cache.output, batch_labels)
                                                 : mse_batch(cache.output, batch_values);
      if (!std::isfinite(lg.loss)) throw DivergenceError(epoch, "non-finite batch loss");
      epoch_loss += lg.loss * static_cast<double>(len);
      adam.step(model, backward(model, cache, lg.grad));
    }
    epoch_loss /= static_cast<double>(n);
    if (!std::isfinite(epoch_loss)) throw DivergenceError(epoch, "non-finite epoch loss");
    const double metric =
        have_val ? validation_metric(model, *validation) : std::numeric_limits<double>::quiet_NaN();
    result.history.train_loss.push_back(epoch_loss);
    result.history.validation_metric.push_back(metric);
    if (on_epoch) on_epoch(epoch, epoch_loss, metric);
  }
  return result;
}

}  // namespace

Adam::Adam(const GruModel& model, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
  for (const auto& block : param_blocks(model.gru, model.head)) {
    m_.push_back(Eigen::VectorXd::Zero(block.values.size()));
    v_.push_back(Eigen::VectorXd::Zero(block.values.size()));
  }
}

void Adam::step(GruModel& model, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  auto params = param_blocks(model.gru, model.head);
  const auto gblocks = param_blocks(grads.gru, grads.head);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = gblocks[i].values;
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * g.cwiseProduct(g);
    params[i].values.array() -=
        lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps_);
  }
}

MatrixXd window_matrix(const data::P1Dataset& ds) { return stack_windows(ds); }
MatrixXd window_matrix(const data::P2Dataset& ds) { return stack_windows(ds); }

TrainResult train(const data::P1Dataset& train_set, const data::P1Dataset* validation,
                  ModelConfig config, const EpochCallback& on_epoch) {
  return train_impl(train_set, validation, config, Task::classify, 1.0, on_epoch);
}

TrainResult train(const data::P2Dataset& train_set, const data::P2Dataset* validation,
                  ModelConfig config, const EpochCallback& on_epoch) {
  return train_impl(train_set, validation, config, Task::regress,
                    static_cast<double>(train_set.horizon), on_epoch);
}

}  // namespace mmblock::nn
