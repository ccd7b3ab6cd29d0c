#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mghga/matrix.hpp"

namespace mghga {

// Node feature matrix: |V| rows, d columns, every entry finite.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  // Throws InvalidInput when empty or when any entry is NaN/inf.
  explicit FeatureMatrix(Matrix values);

  std::size_t n_nodes() const noexcept { return values_.rows(); }
  std::size_t n_features() const noexcept { return values_.cols(); }
  const Matrix& values() const noexcept { return values_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }

  // Single-cell update; keeps the finiteness invariant.
  void set(std::size_t i, std::size_t j, double v);

  double min_value() const;
  double max_value() const;
  double mean_value() const;
  bool is_binary() const;

  friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;

 private:
  Matrix values_;
};

// Binary incidence structure with one hyperedge per entry of `edges`.
// Member lists are sorted ascending; hyperedge e built around node v keeps the
// index e == v for both distance-based constructors.
class Hypergraph {
 public:
  Hypergraph(std::size_t n_nodes, std::vector<std::vector<std::size_t>> edges,
             std::vector<double> edge_weights);
  // Unit hyperedge weights.
  Hypergraph(std::size_t n_nodes, std::vector<std::vector<std::size_t>> edges);

  std::size_t n_nodes() const noexcept { return n_nodes_; }
  std::size_t n_edges() const noexcept { return edges_.size(); }

  std::span<const std::size_t> members(std::size_t e) const { return edges_[e]; }
  const std::vector<std::vector<std::size_t>>& edges() const noexcept { return edges_; }
  const std::vector<double>& edge_weights() const noexcept { return weights_; }
  // Dv[v] = sum_e W[e] * H[v, e]
  const std::vector<double>& node_degrees() const noexcept { return node_degrees_; }
  // De[e] = |e|
  const std::vector<double>& edge_degrees() const noexcept { return edge_degrees_; }

  bool contains(std::size_t v, std::size_t e) const;
  // Dense |V| x |E| incidence matrix H.
  Matrix incidence() const;

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  std::size_t n_nodes_;
  std::vector<std::vector<std::size_t>> edges_;
  std::vector<double> weights_;
  std::vector<double> node_degrees_;
  std::vector<double> edge_degrees_;
};

// Dv^-1/2 H W De^-1 H^T Dv^-1/2, stored sparse. Entries (u, v) and (v, u) are
// accumulated in the same order, so the stored matrix is exactly symmetric.
class NormalizedOperator {
 public:
  explicit NormalizedOperator(CsrMatrix m) : m_(std::move(m)) {}

  std::size_t size() const noexcept { return m_.rows; }
  const CsrMatrix& csr() const noexcept { return m_; }
  Matrix dense() const { return m_.to_dense(); }

 private:
  CsrMatrix m_;
};

enum class ConstructionKind { knn, epsilon };

struct Construction {
  ConstructionKind kind = ConstructionKind::knn;
  std::size_t k = 10;
  double epsilon = 0.5;

  static Construction knn(std::size_t k) { return {ConstructionKind::knn, k, 0.5}; }
  static Construction eps(double e) { return {ConstructionKind::epsilon, 10, e}; }

  // "knn:10" / "eps:0.5"
  static Construction parse(const std::string& text);
  std::string to_string() const;

  friend bool operator==(const Construction&, const Construction&) = default;
};

Matrix pairwise_distances(const FeatureMatrix& x);

// Hyperedge e_v = {v} plus the k nearest other nodes, ties to the lower index.
Hypergraph build_knn_hypergraph(const FeatureMatrix& x, std::size_t k);

// Hyperedge e_v = {u : dist(u, v) <= epsilon} (always contains v).
Hypergraph build_epsilon_hypergraph(const FeatureMatrix& x, double epsilon);

Hypergraph build_hypergraph(const FeatureMatrix& x, const Construction& c);

NormalizedOperator normalized_operator(const Hypergraph& g);

}  // namespace mghga
