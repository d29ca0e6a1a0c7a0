// SPDX-License-Identifier: Apache-2.0
//
// Single-layer GRU with a dense head, written out by hand: forward pass,
// backpropagation through time and the two training losses.
//
//   z_t = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
//   r_t = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
//   c_t = tanh(W_h x_t + U_h (r_t * h_{t-1}) + b_h)
//   h_t = (1 - z_t) * h_{t-1} + z_t * c_t
//
// The last hidden state goes through inverted dropout (training only) and
// an affine head with 2 logits (classification) or 1 output (regression).
// Batched tensors hold one sequence per column.
#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "mmblock/dataset.hpp"

namespace mmblock::nn {

using data::Task;

struct GruParams {
  Eigen::MatrixXd W_z, W_r, W_h;  // hidden x input
  Eigen::MatrixXd U_z, U_r, U_h;  // hidden x hidden
  Eigen::VectorXd b_z, b_r, b_h;  // hidden

  static GruParams zeros(int input_dim, int hidden);
  int input_dim() const noexcept { return static_cast<int>(W_z.cols()); }
  int hidden() const noexcept { return static_cast<int>(W_z.rows()); }
  void check_shapes() const;
};

struct HeadParams {
  Eigen::MatrixXd W_out;  // output x hidden
  Eigen::VectorXd b_out;  // output

  static HeadParams zeros(int output_dim, int hidden);
};

struct ModelConfig {
  int input_dim = 1;
  int hidden = 20;
  int layers = 1;
  double dropout = 0.2;
  int seq_len = data::kDefaultObservation;
  Task task = Task::classify;
  int epochs = 1000;
  double learning_rate = 1e-3;
  int batch_size = 32;
  std::uint64_t seed = 7;

  int output_dim() const noexcept { return task == Task::classify ? 2 : 1; }
  void validate() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct GruModel {
  ModelConfig config;
  GruParams gru;
  HeadParams head;
  /// Regression targets are divided by this during training (T_P).
  double target_scale = 1.0;

  /// Uniform(-1/sqrt(hidden), 1/sqrt(hidden)) weights, zero biases.
  static GruModel initialize(const ModelConfig& config);
  static GruModel zeros(const ModelConfig& config);
  void check_shapes() const;
};

/// Parameter gradients; same shapes as the model.
struct Gradients {
  GruParams gru;
  HeadParams head;

  static Gradients zeros_like(const GruModel& model);
};

/// Named flat views over every parameter block, in a fixed order.
template <class Scalar>
struct ParamBlockT {
  std::string_view name;
  Eigen::Map<Scalar> values;
};
using ParamBlock = ParamBlockT<Eigen::VectorXd>;
using ConstParamBlock = ParamBlockT<const Eigen::VectorXd>;

std::vector<ParamBlock> param_blocks(GruParams& gru, HeadParams& head);
std::vector<ConstParamBlock> param_blocks(const GruParams& gru, const HeadParams& head);

struct CellState {
  Eigen::VectorXd h;
  Eigen::VectorXd z;
  Eigen::VectorXd r;
  Eigen::VectorXd candidate;
};

CellState gru_cell(const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev, const GruParams& p);
CellState gru_cell(double x, const Eigen::VectorXd& h_prev, const GruParams& p);

enum class Mode { train, eval };

struct ForwardCache {
  std::vector<Eigen::MatrixXd> x;          // input_dim x B per step
  std::vector<Eigen::MatrixXd> h;          // hidden x B, h[0] is the zero state
  std::vector<Eigen::MatrixXd> z, r, cand; // hidden x B per step
  Eigen::MatrixXd mask;                    // hidden x B, scaled keep mask
  Eigen::MatrixXd dropped;                 // mask * h[T]
  Eigen::MatrixXd output;                  // output x B

  int steps() const noexcept { return static_cast<int>(x.size()); }
  int batch() const noexcept { return static_cast<int>(output.cols()); }
};

/// `inputs` is seq_len x B (input_dim == 1). In train mode a dropout mask
/// is drawn from `rng`; eval mode ignores `rng`.
ForwardCache forward(const GruModel& model, const Eigen::MatrixXd& inputs, Mode mode,
                     std::mt19937_64* rng = nullptr);

/// Forward pass with a caller-supplied dropout mask (hidden x B).
ForwardCache forward_with_mask(const GruModel& model, const Eigen::MatrixXd& inputs,
                               const Eigen::MatrixXd& mask);

/// Single-window convenience wrapper.
ForwardCache forward(const GruModel& model, std::span<const double> window, Mode mode,
                     std::mt19937_64* rng = nullptr);

/// Reverse-mode gradients for upstream gradient `d_output` (output x B).
Gradients backward(const GruModel& model, const ForwardCache& cache,
                   const Eigen::MatrixXd& d_output);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// -sum_c p_c log softmax(logits)_c via log-sum-exp.
double cross_entropy_loss(const Eigen::VectorXd& logits, const Eigen::VectorXd& onehot);
double mse_loss(double prediction, double target);

struct LossGrad {
  double loss = 0.0;       // batch mean
  Eigen::MatrixXd grad;    // d loss / d output
};

LossGrad cross_entropy_batch(const Eigen::MatrixXd& logits, std::span<const int> labels);
LossGrad mse_batch(const Eigen::MatrixXd& predictions, std::span<const double> targets);

struct P1Prediction {
  int label = 0;
  Eigen::Vector2d probabilities;
};

/// argmax of the softmax; exact ties resolve to 0.
P1Prediction predict_p1(const GruModel& model, std::span<const double> window);
int label_from_logits(double logit0, double logit1) noexcept;

/// Unscaled regression output (n' in time instances).
double predict_p2(const GruModel& model, std::span<const double> window);

/// Columns of `inputs` are windows. Eval mode.
std::vector<int> predict_p1_batch(const GruModel& model, const Eigen::MatrixXd& inputs);
std::vector<double> predict_p2_batch(const GruModel& model, const Eigen::MatrixXd& inputs);

}  // namespace mmblock::nn
