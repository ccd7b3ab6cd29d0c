#include "mghga/hgnn.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mghga/errors.hpp"
#include "mghga/kernels.hpp"

namespace mghga {

namespace {

constexpr double kLogClamp = 1e-12;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

struct ForwardTrace {
  Matrix pre_hidden;  // G X theta1
  Matrix hidden;      // ReLU(pre_hidden), dropout applied
  Matrix probs;       // softmax output
};

void check_shapes(const NormalizedOperator& op, const CsrMatrix& x, const ModelParams& params) {
  if (op.size() != x.rows)
    throw DimensionError("operator is " + std::to_string(op.size()) + "x" +
                         std::to_string(op.size()) + " but features have " +
                         std::to_string(x.rows) + " rows");
  if (params.theta1.rows() != x.cols)
    throw DimensionError("theta1 expects " + std::to_string(params.theta1.rows()) +
                         " features, got " + std::to_string(x.cols));
  if (params.theta1.cols() != params.theta2.rows())
    throw DimensionError("theta1/theta2 hidden dimensions differ");
}

void check_labels(const LabelData& labels, std::size_t n, std::size_t c) {
  if (labels.size() != n) throw DimensionError("label count does not match node count");
  if (labels.train_mask.size() != n) throw DimensionError("train mask length does not match node count");
  if (labels.n_classes != c) throw DimensionError("label class count does not match model output");
}

void softmax_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      s += v;
    }
    for (double& v : r) v /= s;
  }
}

ForwardTrace forward_trace(const NormalizedOperator& op, const CsrMatrix& x,
                           const ModelParams& params, const Matrix* mask) {
  check_shapes(op, x, params);
  ForwardTrace t;
  t.pre_hidden = kernels::spmm(op.csr(), kernels::spmm(x, params.theta1));
  t.hidden = t.pre_hidden;
  for (double& v : t.hidden.values()) v = v > 0.0 ? v : 0.0;
  if (mask) {
    auto hv = t.hidden.values();
    auto mv = mask->values();
    for (std::size_t k = 0; k < hv.size(); ++k) hv[k] *= mv[k];
  }
  t.probs = kernels::spmm(op.csr(), kernels::gemm(t.hidden, params.theta2));
  softmax_rows(t.probs);
  return t;
}

// dL/d(logits): (Z - onehot(Y)) on training rows, zero elsewhere.
Matrix logit_grad(const Matrix& z, const LabelData& labels) {
  Matrix g(z.rows(), z.cols());
  for (std::size_t u = 0; u < z.rows(); ++u) {
    if (!labels.train_mask[u]) continue;
    auto gr = g.row(u);
    auto zr = z.row(u);
    std::copy(zr.begin(), zr.end(), gr.begin());
    gr[static_cast<std::size_t>(labels.labels[u])] -= 1.0;
  }
  return g;
}

struct Backward {
  Matrix hidden_side;  // G^T dA2, reused for d theta2
  Matrix input_side;   // G^T dA1
};

// The stored operator is exactly symmetric, so G^T products reuse G.
Backward backward(const NormalizedOperator& op, const ModelParams& params, const ForwardTrace& t,
                  const LabelData& labels, const Matrix* mask) {
  Backward b;
  b.hidden_side = kernels::spmm(op.csr(), logit_grad(t.probs, labels));
  Matrix d_hidden = kernels::gemm_nt(b.hidden_side, params.theta2);
  auto dh = d_hidden.values();
  auto pre = t.pre_hidden.values();
  for (std::size_t k = 0; k < dh.size(); ++k) {
    double g = dh[k];
    if (mask) g *= mask->values()[k];
    dh[k] = pre[k] > 0.0 ? g : 0.0;
  }
  b.input_side = kernels::spmm(op.csr(), d_hidden);
  return b;
}

ParamGradients param_grads(const CsrMatrix& x, const ForwardTrace& t, const Backward& b) {
  return {kernels::spmm_tn(x, b.input_side), kernels::gemm_tn(t.hidden, b.hidden_side)};
}

void glorot_fill(Matrix& m, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (double& v : m.values()) v = dist(rng);
}

struct AdamState {
  Matrix m1, v1, m2, v2;
  long step = 0;
};

void adam_update(Matrix& p, const Matrix& g, Matrix& m, Matrix& v, double lr, double bc1,
                 double bc2) {
  auto pv = p.values();
  auto gv = g.values();
  auto mv = m.values();
  auto vv = v.values();
  for (std::size_t k = 0; k < pv.size(); ++k) {
    mv[k] = kAdamBeta1 * mv[k] + (1.0 - kAdamBeta1) * gv[k];
    vv[k] = kAdamBeta2 * vv[k] + (1.0 - kAdamBeta2) * gv[k] * gv[k];
    const double mhat = mv[k] / bc1;
    const double vhat = vv[k] / bc2;
    pv[k] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
  }
}

}  // namespace

void ModelParams::validate() const {
  if (theta1.rows() == 0 || theta1.cols() == 0) throw DimensionError("theta1 is empty");
  if (theta2.rows() != theta1.cols()) throw DimensionError("theta1/theta2 hidden dimensions differ");
  if (theta2.cols() < 2) throw InvalidInput("model needs at least two classes");
  for (const Matrix* m : {&theta1, &theta2})
    for (double v : m->values())
      if (!std::isfinite(v)) throw InvalidInput("model parameters contain a non-finite entry");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("epochs must be non-negative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (hidden_dim < 1) throw ConfigError("hidden dimension must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout rate must be in [0, 1)");
}

void LabelData::validate() const {
  const std::size_t n = labels.size();
  if (train_mask.size() != n || test_mask.size() != n)
    throw DimensionError("masks must have one entry per node");
  if (n_classes < 2) throw InvalidInput("at least two classes required");
  bool any_train = false;
  for (std::size_t u = 0; u < n; ++u) {
    if (labels[u] < 0 || static_cast<std::size_t>(labels[u]) >= n_classes)
      throw InvalidInput("label of node " + std::to_string(u) + " out of range");
    if (train_mask[u] && test_mask[u]) throw InvalidInput("train and test masks overlap");
    any_train = any_train || train_mask[u];
  }
  if (!any_train) throw InvalidInput("empty train mask");
}

Matrix Dropout::sample_mask(std::size_t rows, std::size_t cols) {
  Matrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate_);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : mask.values()) v = u(*rng_) < rate_ ? 0.0 : keep_scale;
  return mask;
}

ModelParams init_params(std::size_t n_features, std::size_t hidden_dim, std::size_t n_classes,
                        std::uint64_t seed) {
  ModelParams p{Matrix(n_features, hidden_dim), Matrix(hidden_dim, n_classes)};
  Rng rng = make_rng(seed, Stream::init);
  glorot_fill(p.theta1, rng);
  glorot_fill(p.theta2, rng);
  return p;
}

Matrix forward(const NormalizedOperator& op, const CsrMatrix& x, const ModelParams& params,
               Dropout* dropout) {
  Matrix mask;
  if (dropout && dropout->rate() > 0.0) mask = dropout->sample_mask(x.rows, params.hidden_dim());
  return forward_trace(op, x, params, mask.empty() ? nullptr : &mask).probs;
}

Matrix forward(const NormalizedOperator& op, const FeatureMatrix& x, const ModelParams& params,
               Dropout* dropout) {
  return forward(op, CsrMatrix::from_dense(x.values()), params, dropout);
}

double loss(const Matrix& z, const LabelData& labels) {
  if (labels.size() != z.rows() || labels.train_mask.size() != z.rows())
    throw DimensionError("loss: label count does not match probability rows");
  double s = 0.0;
  bool any = false;
  for (std::size_t u = 0; u < z.rows(); ++u) {
    if (!labels.train_mask[u]) continue;
    any = true;
    s -= std::log(std::max(z(u, static_cast<std::size_t>(labels.labels[u])), kLogClamp));
  }
  if (!any) throw InvalidInput("loss: empty train mask");
  return s;
}

std::vector<int> predict(const Matrix& z) {
  std::vector<int> out(z.rows());
  for (std::size_t u = 0; u < z.rows(); ++u) {
    auto r = z.row(u);
    out[u] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return out;
}

double accuracy(const std::vector<int>& preds, const LabelData& labels, Split on) {
  const auto& mask = on == Split::train ? labels.train_mask : labels.test_mask;
  if (preds.size() != labels.size() || mask.size() != labels.size())
    throw DimensionError("accuracy: length mismatch");
  std::size_t total = 0, correct = 0;
  for (std::size_t u = 0; u < preds.size(); ++u) {
    if (!mask[u]) continue;
    ++total;
    if (preds[u] == labels.labels[u]) ++correct;
  }
  if (total == 0) throw InvalidInput("accuracy: empty mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

ModelParams train(const NormalizedOperator& op, const FeatureMatrix& x, const LabelData& labels,
                  const TrainConfig& cfg, std::vector<double>* loss_trace) {
  cfg.validate();
  labels.validate();
  const CsrMatrix sx = CsrMatrix::from_dense(x.values());
  ModelParams params = init_params(x.n_features(), cfg.hidden_dim, labels.n_classes, cfg.seed);
  check_shapes(op, sx, params);
  check_labels(labels, x.n_nodes(), labels.n_classes);

  Rng drop_rng = make_rng(cfg.seed, Stream::dropout);
  Dropout dropout(cfg.dropout_rate, drop_rng);
  AdamState adam{Matrix(params.theta1.rows(), params.theta1.cols()),
                 Matrix(params.theta1.rows(), params.theta1.cols()),
                 Matrix(params.theta2.rows(), params.theta2.cols()),
                 Matrix(params.theta2.rows(), params.theta2.cols())};

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Matrix mask;
    if (cfg.dropout_rate > 0.0) mask = dropout.sample_mask(x.n_nodes(), cfg.hidden_dim);
    const Matrix* mp = mask.empty() ? nullptr : &mask;
    const ForwardTrace t = forward_trace(op, sx, params, mp);
    const double l = loss(t.probs, labels);
    if (!std::isfinite(l))
      throw DivergenceError("training loss became non-finite at epoch " + std::to_string(epoch), epoch);
    if (loss_trace) loss_trace->push_back(l);
    const ParamGradients g = param_grads(sx, t, backward(op, params, t, labels, mp));

    ++adam.step;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(adam.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(adam.step));
    adam_update(params.theta1, g.theta1, adam.m1, adam.v1, cfg.learning_rate, bc1, bc2);
    adam_update(params.theta2, g.theta2, adam.m2, adam.v2, cfg.learning_rate, bc1, bc2);
  }
  return params;
}

ParamGradients grad_params(const NormalizedOperator& op, const FeatureMatrix& x,
                           const ModelParams& params, const LabelData& labels) {
  const CsrMatrix sx = CsrMatrix::from_dense(x.values());
  check_labels(labels, x.n_nodes(), params.n_classes());
  const ForwardTrace t = forward_trace(op, sx, params, nullptr);
  return param_grads(sx, t, backward(op, params, t, labels, nullptr));
}

Matrix grad_features(const NormalizedOperator& op, const CsrMatrix& x, const ModelParams& params,
                     const LabelData& labels) {
  check_labels(labels, x.rows, params.n_classes());
  const ForwardTrace t = forward_trace(op, x, params, nullptr);
  const Backward b = backward(op, params, t, labels, nullptr);
  return kernels::gemm_nt(b.input_side, params.theta1);
}

Matrix grad_features(const NormalizedOperator& op, const FeatureMatrix& x,
                     const ModelParams& params, const LabelData& labels) {
  return grad_features(op, CsrMatrix::from_dense(x.values()), params, labels);
}

}  // namespace mghga
