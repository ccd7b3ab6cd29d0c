#include "mghga/hypergraph.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mghga/errors.hpp"
#include "mghga/kernels.hpp"

namespace mghga {

// ---------------------------------------------------------------------------
// FeatureMatrix
// ---------------------------------------------------------------------------

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0)
    throw InvalidInput("feature matrix must have at least one node and one feature");
  for (double v : values_.values())
    if (!std::isfinite(v)) throw InvalidInput("feature matrix contains a non-finite entry");
}

void FeatureMatrix::set(std::size_t i, std::size_t j, double v) {
  if (!std::isfinite(v)) throw InvalidInput("non-finite feature value");
  values_(i, j) = v;
}

double FeatureMatrix::min_value() const {
  return *std::min_element(values_.values().begin(), values_.values().end());
}

double FeatureMatrix::max_value() const {
  return *std::max_element(values_.values().begin(), values_.values().end());
}

double FeatureMatrix::mean_value() const {
  double s = 0.0;
  for (double v : values_.values()) s += v;
  return s / static_cast<double>(values_.size());
}

bool FeatureMatrix::is_binary() const {
  return std::all_of(values_.values().begin(), values_.values().end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

// ---------------------------------------------------------------------------
// Hypergraph
// ---------------------------------------------------------------------------

Hypergraph::Hypergraph(std::size_t n_nodes, std::vector<std::vector<std::size_t>> edges,
                       std::vector<double> edge_weights)
    : n_nodes_(n_nodes), edges_(std::move(edges)), weights_(std::move(edge_weights)) {
  if (weights_.size() != edges_.size())
    throw DimensionError("hypergraph: one weight per hyperedge required");
  node_degrees_.assign(n_nodes_, 0.0);
  edge_degrees_.resize(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    auto& m = edges_[e];
    if (!(weights_[e] > 0.0) || !std::isfinite(weights_[e]))
      throw InvalidParameter("hypergraph: edge weights must be positive and finite");
    if (!std::is_sorted(m.begin(), m.end()) || std::adjacent_find(m.begin(), m.end()) != m.end())
      throw InvalidInput("hypergraph: member lists must be sorted and unique");
    if (!m.empty() && m.back() >= n_nodes_) throw InvalidInput("hypergraph: member out of range");
    edge_degrees_[e] = static_cast<double>(m.size());
    for (std::size_t v : m) node_degrees_[v] += weights_[e];
  }
}

Hypergraph::Hypergraph(std::size_t n_nodes, std::vector<std::vector<std::size_t>> edges)
    : Hypergraph(n_nodes, edges, std::vector<double>(edges.size(), 1.0)) {}

bool Hypergraph::contains(std::size_t v, std::size_t e) const {
  return std::binary_search(edges_[e].begin(), edges_[e].end(), v);
}

Matrix Hypergraph::incidence() const {
  Matrix h(n_nodes_, edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e)
    for (std::size_t v : edges_[e]) h(v, e) = 1.0;
  return h;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Construction Construction::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("construction must be knn:K or eps:E, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  try {
    std::size_t used = 0;
    if (kind == "knn") {
      const long k = std::stol(arg, &used);
      if (used != arg.size() || k < 1) throw ConfigError("bad K");
      return knn(static_cast<std::size_t>(k));
    }
    if (kind == "eps" || kind == "epsilon") {
      const double e = std::stod(arg, &used);
      if (used != arg.size() || !(e > 0.0)) throw ConfigError("bad epsilon");
      return eps(e);
    }
  } catch (const std::logic_error&) {
  } catch (const ConfigError&) {
  }
  throw ConfigError("construction must be knn:K or eps:E, got '" + text + "'");
}

std::string Construction::to_string() const {
  if (kind == ConstructionKind::knn) return "knn:" + std::to_string(k);
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, epsilon);
  return "eps:" + std::string(buf, r.ptr);
}

Matrix pairwise_distances(const FeatureMatrix& x) {
  return kernels::pairwise_distances(CsrMatrix::from_dense(x.values()));
}

Hypergraph build_knn_hypergraph(const FeatureMatrix& x, std::size_t k) {
  const std::size_t n = x.n_nodes();
  if (k < 1 || k >= n)
    throw InvalidParameter("knn hypergraph needs 1 <= K < |V| (K=" + std::to_string(k) +
                           ", |V|=" + std::to_string(n) + ")");
  const CsrMatrix sx = CsrMatrix::from_dense(x.values());
  std::vector<std::vector<std::size_t>> edges(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> dist(n);
    std::vector<std::size_t> cand(n - 1);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t iv = 0; iv < nn; ++iv) {
      const auto v = static_cast<std::size_t>(iv);
      kernels::distance_row(sx, v, dist);
      std::size_t c = 0;
      for (std::size_t u = 0; u < n; ++u)
        if (u != v) cand[c++] = u;
      std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                        [&](std::size_t a, std::size_t b) {
                          return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
                        });
      std::vector<std::size_t> members(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
      members.push_back(v);
      std::sort(members.begin(), members.end());
      edges[v] = std::move(members);
    }
  }
  return Hypergraph(n, std::move(edges));
}

Hypergraph build_epsilon_hypergraph(const FeatureMatrix& x, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon))
    throw InvalidParameter("epsilon hypergraph needs epsilon > 0");
  const std::size_t n = x.n_nodes();
  const CsrMatrix sx = CsrMatrix::from_dense(x.values());
  std::vector<std::vector<std::size_t>> edges(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> dist(n);
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t iv = 0; iv < nn; ++iv) {
      const auto v = static_cast<std::size_t>(iv);
      kernels::distance_row(sx, v, dist);
      std::vector<std::size_t> members;
      for (std::size_t u = 0; u < n; ++u)
        if (u == v || dist[u] <= epsilon) members.push_back(u);
      edges[v] = std::move(members);
    }
  }
  return Hypergraph(n, std::move(edges));
}

Hypergraph build_hypergraph(const FeatureMatrix& x, const Construction& c) {
  return c.kind == ConstructionKind::knn ? build_knn_hypergraph(x, c.k)
                                         : build_epsilon_hypergraph(x, c.epsilon);
}

// ---------------------------------------------------------------------------
// Normalized operator
// ---------------------------------------------------------------------------

NormalizedOperator normalized_operator(const Hypergraph& g) {
  const std::size_t n = g.n_nodes();
  const auto& dv = g.node_degrees();
  const auto& de = g.edge_degrees();
  for (std::size_t v = 0; v < n; ++v)
    if (!(dv[v] > 0.0)) throw DegenerateHypergraph("node " + std::to_string(v) + " has zero degree");
  for (std::size_t e = 0; e < g.n_edges(); ++e)
    if (!(de[e] > 0.0)) throw DegenerateHypergraph("hyperedge " + std::to_string(e) + " is empty");

  // Edges incident to each node, ascending.
  std::vector<std::vector<std::size_t>> incident(n);
  for (std::size_t e = 0; e < g.n_edges(); ++e)
    for (std::size_t v : g.members(e)) incident[v].push_back(e);

  std::vector<double> edge_scale(g.n_edges());
  for (std::size_t e = 0; e < g.n_edges(); ++e) edge_scale[e] = g.edge_weights()[e] / de[e];
  std::vector<double> inv_sqrt(n);
  for (std::size_t v = 0; v < n; ++v) inv_sqrt[v] = 1.0 / std::sqrt(dv[v]);

  std::vector<std::vector<std::size_t>> row_cols(n);
  std::vector<std::vector<double>> row_vals(n);
  const auto nn = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel
  {
    std::vector<double> acc(n, 0.0);
    std::vector<char> seen(n, 0);
    std::vector<std::size_t> touched;
#pragma omp for schedule(dynamic, 32)
    for (std::ptrdiff_t iu = 0; iu < nn; ++iu) {
      const auto u = static_cast<std::size_t>(iu);
      touched.clear();
      // Ascending edge order for every (u, v) pair, so (u, v) and (v, u) see the
      // same summation sequence.
      for (std::size_t e : incident[u]) {
        for (std::size_t v : g.members(e)) {
          if (!seen[v]) {
            seen[v] = 1;
            touched.push_back(v);
          }
          acc[v] += edge_scale[e];
        }
      }
      std::sort(touched.begin(), touched.end());
      auto& cols = row_cols[u];
      auto& vals = row_vals[u];
      cols.reserve(touched.size());
      vals.reserve(touched.size());
      for (std::size_t v : touched) {
        cols.push_back(v);
        vals.push_back(acc[v] * (inv_sqrt[u] * inv_sqrt[v]));
        acc[v] = 0.0;
        seen[v] = 0;
      }
    }
  }

  CsrMatrix m;
  m.rows = m.cols = n;
  m.row_ptr.assign(n + 1, 0);
  for (std::size_t u = 0; u < n; ++u) m.row_ptr[u + 1] = m.row_ptr[u] + row_cols[u].size();
  m.col_idx.reserve(m.row_ptr[n]);
  m.values.reserve(m.row_ptr[n]);
  for (std::size_t u = 0; u < n; ++u) {
    m.col_idx.insert(m.col_idx.end(), row_cols[u].begin(), row_cols[u].end());
    m.values.insert(m.values.end(), row_vals[u].begin(), row_vals[u].end());
  }
  return NormalizedOperator(std::move(m));
}

}  // namespace mghga
