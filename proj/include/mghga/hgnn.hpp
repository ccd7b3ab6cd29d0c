#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mghga/hypergraph.hpp"
#include "mghga/matrix.hpp"
#include "mghga/rng.hpp"

// Two-layer hypergraph convolutional network
//
//   Z = softmax(G · ReLU(G · X · theta1) · theta2)
//
// where G is the normalized hypergraph operator. Gradients are derived by hand
// (reverse mode) for both the parameters and the input features.
namespace mghga {

struct ModelParams {
  Matrix theta1;  // d x h
  Matrix theta2;  // h x c

  std::size_t n_features() const noexcept { return theta1.rows(); }
  std::size_t hidden_dim() const noexcept { return theta1.cols(); }
  std::size_t n_classes() const noexcept { return theta2.cols(); }

  // Throws DimensionError / InvalidInput when the invariants are broken.
  void validate() const;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct TrainConfig {
  int epochs = 300;
  double learning_rate = 0.001;
  std::size_t hidden_dim = 64;
  double dropout_rate = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

struct LabelData {
  std::vector<int> labels;
  std::vector<std::uint8_t> train_mask;
  std::vector<std::uint8_t> test_mask;
  std::size_t n_classes = 0;

  std::size_t size() const noexcept { return labels.size(); }
  // Masks disjoint and non-empty, labels within [0, n_classes).
  void validate() const;
};

enum class Split { train, test };

// Inverted dropout on the hidden activation.
class Dropout {
 public:
  Dropout(double rate, Rng& rng) : rate_(rate), rng_(&rng) {}

  double rate() const noexcept { return rate_; }
  // Mask with entries 0 or 1/(1 - rate).
  Matrix sample_mask(std::size_t rows, std::size_t cols);

 private:
  double rate_;
  Rng* rng_;
};

struct ParamGradients {
  Matrix theta1;
  Matrix theta2;
};

// Glorot-uniform initialisation, seeded.
ModelParams init_params(std::size_t n_features, std::size_t hidden_dim, std::size_t n_classes,
                        std::uint64_t seed);

Matrix forward(const NormalizedOperator& op, const FeatureMatrix& x, const ModelParams& params,
               Dropout* dropout = nullptr);
Matrix forward(const NormalizedOperator& op, const CsrMatrix& x, const ModelParams& params,
               Dropout* dropout = nullptr);

// -sum_{u in train} ln Z[u, y_u], with the log argument clamped at 1e-12.
double loss(const Matrix& z, const LabelData& labels);

// Row-wise argmax, ties to the smaller class index.
std::vector<int> predict(const Matrix& z);

double accuracy(const std::vector<int>& preds, const LabelData& labels, Split on);

// Full-batch Adam on the training loss, dropout active. When loss_trace is
// given, the loss of every epoch is appended to it.
ModelParams train(const NormalizedOperator& op, const FeatureMatrix& x, const LabelData& labels,
                  const TrainConfig& cfg, std::vector<double>* loss_trace = nullptr);

// Gradients of the (dropout-free) training loss.
ParamGradients grad_params(const NormalizedOperator& op, const FeatureMatrix& x,
                           const ModelParams& params, const LabelData& labels);

// dL/dX for every feature cell, dropout disabled.
Matrix grad_features(const NormalizedOperator& op, const FeatureMatrix& x,
                     const ModelParams& params, const LabelData& labels);
Matrix grad_features(const NormalizedOperator& op, const CsrMatrix& x, const ModelParams& params,
                     const LabelData& labels);

}  // namespace mghga
