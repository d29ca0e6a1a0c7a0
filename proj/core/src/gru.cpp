// SPDX-License-Identifier: Apache-2.0
#include "mmblock/gru.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "mmblock/errors.hpp"

namespace mmblock::nn {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd sigmoid(const MatrixXd& a) {
  return (1.0 + (-a.array()).exp()).inverse().matrix();
}

void require(bool ok, const char* what) {
  if (!ok) throw DataError(what);
}

void check_inputs(const GruModel& model, const MatrixXd& inputs) {
  model.check_shapes();
  if (model.gru.input_dim() != 1) throw DataError("forward: only scalar inputs are supported");
  if (inputs.rows() != model.config.seq_len)
    throw DataError("forward: window length " + std::to_string(inputs.rows()) +
                    " != seq_len " + std::to_string(model.config.seq_len));
  if (inputs.cols() < 1) throw DataError("forward: empty batch");
}

void check_finite(const ForwardCache& cache) {
  if (cache.output.allFinite()) return;
  for (Eigen::Index b = 0; b < cache.output.cols(); ++b) {
    if (cache.output.col(b).allFinite()) continue;
    std::ostringstream os;
    os << "forward: non-finite output for batch column " << b << " (inputs:";
    for (const auto& x : cache.x) os << ' ' << x(0, b);
    os << ")";
    throw NumericError(os.str());
  }
}

template <class Block, class G, class H>
std::vector<Block> make_blocks(G& g, H& h) {
  std::vector<Block> out;
  out.reserve(11);
  const auto add = [&](std::string_view name, auto& m) {
    out.push_back(Block{name, decltype(Block::values)(m.data(), m.size())});
  };
  add("W_z", g.W_z);
  add("W_r", g.W_r);
  add("W_h", g.W_h);
  add("U_z", g.U_z);
  add("U_r", g.U_r);
  add("U_h", g.U_h);
  add("b_z", g.b_z);
  add("b_r", g.b_r);
  add("b_h", g.b_h);
  add("W_out", h.W_out);
  add("b_out", h.b_out);
  return out;
}

}  // namespace

GruParams GruParams::zeros(int input_dim, int hidden) {
  GruParams p;
  for (MatrixXd* m : {&p.W_z, &p.W_r, &p.W_h}) *m = MatrixXd::Zero(hidden, input_dim);
  for (MatrixXd* m : {&p.U_z, &p.U_r, &p.U_h}) *m = MatrixXd::Zero(hidden, hidden);
  for (VectorXd* v : {&p.b_z, &p.b_r, &p.b_h}) *v = VectorXd::Zero(hidden);
  return p;
}

void GruParams::check_shapes() const {
  const auto n = W_z.rows();
  const auto in = W_z.cols();
  for (const MatrixXd* m : {&W_z, &W_r, &W_h}) require(m->rows() == n && m->cols() == in, "gru: W shape mismatch");
  for (const MatrixXd* m : {&U_z, &U_r, &U_h}) require(m->rows() == n && m->cols() == n, "gru: U shape mismatch");
  for (const VectorXd* v : {&b_z, &b_r, &b_h}) require(v->size() == n, "gru: bias shape mismatch");
}

HeadParams HeadParams::zeros(int output_dim, int hidden) {
  return {MatrixXd::Zero(output_dim, hidden), VectorXd::Zero(output_dim)};
}

void ModelConfig::validate() const {
  if (input_dim != 1) throw ConfigError("model: input_dim must be 1");
  if (hidden < 1) throw ConfigError("model: hidden must be >= 1");
  if (layers != 1) throw ConfigError("model: only single-layer networks are supported");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model: dropout must lie in [0, 1)");
  if (seq_len < 1) throw ConfigError("model: seq_len must be >= 1");
  if (epochs < 1) throw ConfigError("model: epochs must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("model: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("model: batch_size must be >= 1");
}

GruModel GruModel::zeros(const ModelConfig& config) {
  config.validate();
  return {config, GruParams::zeros(config.input_dim, config.hidden),
          HeadParams::zeros(config.output_dim(), config.hidden), 1.0};
}

GruModel GruModel::initialize(const ModelConfig& config) {
  GruModel m = zeros(config);
  std::mt19937_64 rng(config.seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(config.hidden));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& block : param_blocks(m.gru, m.head)) {
    if (block.name.starts_with("b_")) continue;
    for (Eigen::Index i = 0; i < block.values.size(); ++i) block.values[i] = u(rng);
  }
  return m;
}

void GruModel::check_shapes() const {
  gru.check_shapes();
  require(head.W_out.cols() == gru.hidden(), "head: W_out columns != hidden");
  require(head.W_out.rows() == config.output_dim(), "head: output dimension does not match task");
  require(head.b_out.size() == head.W_out.rows(), "head: bias shape mismatch");
}

Gradients Gradients::zeros_like(const GruModel& model) {
  return {GruParams::zeros(model.gru.input_dim(), model.gru.hidden()),
          HeadParams::zeros(static_cast<int>(model.head.W_out.rows()), model.gru.hidden())};
}

std::vector<ParamBlock> param_blocks(GruParams& gru, HeadParams& head) {
  return make_blocks<ParamBlock>(gru, head);
}

std::vector<ConstParamBlock> param_blocks(const GruParams& gru, const HeadParams& head) {
  return make_blocks<ConstParamBlock>(gru, head);
}

CellState gru_cell(const VectorXd& x, const VectorXd& h_prev, const GruParams& p) {
  p.check_shapes();
  if (x.size() != p.input_dim() || h_prev.size() != p.hidden())
    throw DataError("gru_cell: input or state size mismatch");
  CellState s;
  s.z = sigmoid(p.W_z * x + p.U_z * h_prev + p.b_z);
  s.r = sigmoid(p.W_r * x + p.U_r * h_prev + p.b_r);
  s.candidate = (p.W_h * x + p.U_h * s.r.cwiseProduct(h_prev) + p.b_h).array().tanh().matrix();
  s.h = (1.0 - s.z.array()) * h_prev.array() + s.z.array() * s.candidate.array();
  return s;
}

CellState gru_cell(double x, const VectorXd& h_prev, const GruParams& p) {
  VectorXd xv(1);
  xv[0] = x;
  return gru_cell(xv, h_prev, p);
}

ForwardCache forward_with_mask(const GruModel& model, const MatrixXd& inputs, const MatrixXd& mask) {
  check_inputs(model, inputs);
  const auto& p = model.gru;
  const Eigen::Index batch = inputs.cols();
  const int steps = static_cast<int>(inputs.rows());
  if (mask.rows() != p.hidden() || mask.cols() != batch)
    throw DataError("forward: dropout mask shape mismatch");

  ForwardCache c;
  c.x.reserve(steps);
  c.z.reserve(steps);
  c.r.reserve(steps);
  c.cand.reserve(steps);
  c.h.reserve(steps + 1);
  c.h.push_back(MatrixXd::Zero(p.hidden(), batch));
  for (int t = 0; t < steps; ++t) {
    c.x.push_back(inputs.row(t));
    const MatrixXd& hp = c.h.back();
    const MatrixXd& xt = c.x.back();
    MatrixXd z = sigmoid((p.W_z * xt + p.U_z * hp).colwise() + p.b_z);
    MatrixXd r = sigmoid((p.W_r * xt + p.U_r * hp).colwise() + p.b_r);
    MatrixXd cand =
        ((p.W_h * xt + p.U_h * r.cwiseProduct(hp)).colwise() + p.b_h).array().tanh().matrix();
    MatrixXd h = ((1.0 - z.array()) * hp.array() + z.array() * cand.array()).matrix();
    c.z.push_back(std::move(z));
    c.r.push_back(std::move(r));
    c.cand.push_back(std::move(cand));
    c.h.push_back(std::move(h));
  }
  c.mask = mask;
  c.dropped = c.h.back().cwiseProduct(mask);
  c.output = (model.head.W_out * c.dropped).colwise() + model.head.b_out;
  check_finite(c);
  return c;
}

ForwardCache forward(const GruModel& model, const MatrixXd& inputs, Mode mode, std::mt19937_64* rng) {
  check_inputs(model, inputs);
  const int hidden = model.gru.hidden();
  MatrixXd mask = MatrixXd::Ones(hidden, inputs.cols());
  const double rate = model.config.dropout;
  if (mode == Mode::train && rate > 0.0) {
    if (rng == nullptr) throw DataError("forward: train mode with dropout needs an rng");
    std::bernoulli_distribution keep(1.0 - rate);
    const double scale = 1.0 / (1.0 - rate);
    for (Eigen::Index j = 0; j < mask.cols(); ++j)
      for (Eigen::Index i = 0; i < mask.rows(); ++i) mask(i, j) = keep(*rng) ? scale : 0.0;
  }
  return forward_with_mask(model, inputs, mask);
}

ForwardCache forward(const GruModel& model, std::span<const double> window, Mode mode,
                     std::mt19937_64* rng) {
  const Eigen::Map<const MatrixXd> col(window.data(), static_cast<Eigen::Index>(window.size()), 1);
  return forward(model, MatrixXd(col), mode, rng);
}

Gradients backward(const GruModel& model, const ForwardCache& cache, const MatrixXd& d_output) {
  model.check_shapes();
  const auto& p = model.gru;
  const int steps = cache.steps();
  if (steps != model.config.seq_len || static_cast<int>(cache.h.size()) != steps + 1 ||
      cache.h.back().rows() != p.hidden())
    throw DataError("backward: cache does not match model");
  if (d_output.rows() != cache.output.rows() || d_output.cols() != cache.output.cols())
    throw DataError("backward: upstream gradient shape mismatch");

  Gradients g = Gradients::zeros_like(model);
  g.head.W_out.noalias() = d_output * cache.dropped.transpose();
  g.head.b_out = d_output.rowwise().sum();

  MatrixXd dh = (model.head.W_out.transpose() * d_output).cwiseProduct(cache.mask);
  for (int t = steps - 1; t >= 0; --t) {
    const MatrixXd& hp = cache.h[t];
    const MatrixXd& z = cache.z[t];
    const MatrixXd& r = cache.r[t];
    const MatrixXd& cand = cache.cand[t];
    const MatrixXd& xt = cache.x[t];

    const MatrixXd d_cand_pre =
        (dh.array() * z.array() * (1.0 - cand.array().square())).matrix();
    const MatrixXd d_z_pre =
        (dh.array() * (cand.array() - hp.array()) * z.array() * (1.0 - z.array())).matrix();
    MatrixXd dh_prev = (dh.array() * (1.0 - z.array())).matrix();

    const MatrixXd rh = r.cwiseProduct(hp);
    g.gru.W_h.noalias() += d_cand_pre * xt.transpose();
    g.gru.U_h.noalias() += d_cand_pre * rh.transpose();
    g.gru.b_h += d_cand_pre.rowwise().sum();

    const MatrixXd d_rh = p.U_h.transpose() * d_cand_pre;
    dh_prev += d_rh.cwiseProduct(r);
    const MatrixXd d_r_pre =
        (d_rh.array() * hp.array() * r.array() * (1.0 - r.array())).matrix();

    g.gru.W_r.noalias() += d_r_pre * xt.transpose();
    g.gru.U_r.noalias() += d_r_pre * hp.transpose();
    g.gru.b_r += d_r_pre.rowwise().sum();
    g.gru.W_z.noalias() += d_z_pre * xt.transpose();
    g.gru.U_z.noalias() += d_z_pre * hp.transpose();
    g.gru.b_z += d_z_pre.rowwise().sum();

    dh_prev.noalias() += p.U_r.transpose() * d_r_pre;
    dh_prev.noalias() += p.U_z.transpose() * d_z_pre;
    dh = std::move(dh_prev);
  }
  return g;
}

VectorXd softmax(const VectorXd& logits) {
  const double m = logits.maxCoeff();
  VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

double cross_entropy_loss(const VectorXd& logits, const VectorXd& onehot) {
  if (logits.size() != onehot.size()) throw DataError("cross_entropy_loss: size mismatch");
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return -(onehot.array() * (logits.array() - lse)).sum();
}

double mse_loss(double prediction, double target) {
  const double d = prediction - target;
  return d * d;
}

LossGrad cross_entropy_batch(const MatrixXd& logits, std::span<const int> labels) {
  if (logits.rows() != 2 || static_cast<std::size_t>(logits.cols()) != labels.size())
    throw DataError("cross_entropy_batch: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(labels.size());
  LossGrad out{0.0, MatrixXd(2, logits.cols())};
  for (Eigen::Index b = 0; b < logits.cols(); ++b) {
    const VectorXd l = logits.col(b);
    VectorXd onehot = VectorXd::Zero(2);
    onehot[labels[b] ? 1 : 0] = 1.0;
    out.loss += cross_entropy_loss(l, onehot);
    out.grad.col(b) = (softmax(l) - onehot) * inv_b;
  }
  out.loss *= inv_b;
  return out;
}

LossGrad mse_batch(const MatrixXd& predictions, std::span<const double> targets) {
  if (predictions.rows() != 1 || static_cast<std::size_t>(predictions.cols()) != targets.size())
    throw DataError("mse_batch: shape mismatch");
  const double inv_b = 1.0 / static_cast<double>(targets.size());
  LossGrad out{0.0, MatrixXd(1, predictions.cols())};
  for (Eigen::Index b = 0; b < predictions.cols(); ++b) {
    out.loss += mse_loss(predictions(0, b), targets[b]);
    out.grad(0, b) = 2.0 * (predictions(0, b) - targets[b]) * inv_b;
  }
  out.loss *= inv_b;
  return out;
}

int label_from_logits(double logit0, double logit1) noexcept { return logit1 > logit0 ? 1 : 0; }

P1Prediction predict_p1(const GruModel& model, std::span<const double> window) {
  if (model.config.task != Task::classify) throw DataError("predict_p1: model is not a classifier");
  const auto cache = forward(model, window, Mode::eval);
  const VectorXd logits = cache.output.col(0);
  P1Prediction out;
  out.probabilities = softmax(logits);
  out.label = label_from_logits(logits[0], logits[1]);
  return out;
}

double predict_p2(const GruModel& model, std::span<const double> window) {
  if (model.config.task != Task::regress) throw DataError("predict_p2: model is not a regressor");
  const auto cache = forward(model, window, Mode::eval);
  return cache.output(0, 0) * model.target_scale;
}

std::vector<int> predict_p1_batch(const GruModel& model, const MatrixXd& inputs) {
  if (model.config.task != Task::classify) throw DataError("predict_p1: model is not a classifier");
  const auto cache = forward(model, inputs, Mode::eval);
  std::vector<int> out(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index b = 0; b < inputs.cols(); ++b)
    out[b] = label_from_logits(cache.output(0, b), cache.output(1, b));
  return out;
}

std::vector<double> predict_p2_batch(const GruModel& model, const MatrixXd& inputs) {
  if (model.config.task != Task::regress) throw DataError("predict_p2: model is not a regressor");
  const auto cache = forward(model, inputs, Mode::eval);
  std::vector<double> out(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index b = 0; b < inputs.cols(); ++b) out[b] = cache.output(0, b) * model.target_scale;
  return out;
}

}  // namespace mmblock::nn
