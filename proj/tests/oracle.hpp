#pragma once

// Plain-loop reference implementations used only by the tests. Nothing here
// calls into the library's numeric code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "mghga/attack.hpp"
#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"
#include "mghga/matrix.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

inline Dense zeros(std::size_t r, std::size_t c) { return Dense(r, std::vector<double>(c, 0.0)); }

inline Dense from(const mghga::Matrix& m) {
  Dense d = zeros(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d[i][j] = m(i, j);
  return d;
}

inline mghga::Matrix to_matrix(const Dense& d) { return mghga::Matrix::from_rows(d); }

inline Dense matmul(const Dense& a, const Dense& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Dense c = zeros(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      c[i][j] = s;
    }
  return c;
}

inline Dense transpose(const Dense& a) {
  if (a.empty()) return {};
  Dense t = zeros(a[0].size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[0].size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline double max_abs(const Dense& a, const mghga::Matrix& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a[i].size(); ++j) m = std::max(m, std::abs(a[i][j] - b(i, j)));
  return m;
}

inline double distance(const mghga::FeatureMatrix& x, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.n_features(); ++k) {
    const double d = x(i, k) - x(j, k);
    s += d * d;
  }
  return std::sqrt(s);
}

inline Dense distances(const mghga::FeatureMatrix& x) {
  Dense d = zeros(x.n_nodes(), x.n_nodes());
  for (std::size_t i = 0; i < x.n_nodes(); ++i)
    for (std::size_t j = 0; j < x.n_nodes(); ++j) d[i][j] = distance(x, i, j);
  return d;
}

// e_v = {v} plus the K closest other nodes, ties broken by lower index.
inline std::vector<std::vector<std::size_t>> knn_edges(const mghga::FeatureMatrix& x, std::size_t k) {
  const auto d = distances(x);
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t v = 0; v < x.n_nodes(); ++v) {
    std::vector<std::pair<double, std::size_t>> cand;
    for (std::size_t u = 0; u < x.n_nodes(); ++u)
      if (u != v) cand.emplace_back(d[v][u], u);
    std::sort(cand.begin(), cand.end());
    std::vector<std::size_t> e{v};
    for (std::size_t t = 0; t < k; ++t) e.push_back(cand[t].second);
    std::sort(e.begin(), e.end());
    edges.push_back(e);
  }
  return edges;
}

inline std::vector<std::vector<std::size_t>> epsilon_edges(const mghga::FeatureMatrix& x, double eps) {
  const auto d = distances(x);
  std::vector<std::vector<std::size_t>> edges;
  for (std::size_t v = 0; v < x.n_nodes(); ++v) {
    std::vector<std::size_t> e;
    for (std::size_t u = 0; u < x.n_nodes(); ++u)
      if (u == v || d[v][u] <= eps) e.push_back(u);
    edges.push_back(e);
  }
  return edges;
}

// Dv^-1/2 * H * W * De^-1 * H^T * Dv^-1/2 as five explicit dense factors.
inline Dense five_factor(const mghga::Hypergraph& g) {
  const std::size_t n = g.n_nodes(), m = g.n_edges();
  Dense h = zeros(n, m), w = zeros(m, m), de = zeros(m, m), dv = zeros(n, n);
  for (std::size_t e = 0; e < m; ++e)
    for (std::size_t v : g.members(e)) h[v][e] = 1.0;
  for (std::size_t e = 0; e < m; ++e) {
    w[e][e] = g.edge_weights()[e];
    double s = 0.0;
    for (std::size_t v = 0; v < n; ++v) s += h[v][e];
    de[e][e] = 1.0 / s;
  }
  for (std::size_t v = 0; v < n; ++v) {
    double s = 0.0;
    for (std::size_t e = 0; e < m; ++e) s += h[v][e] * g.edge_weights()[e];
    dv[v][v] = 1.0 / std::sqrt(s);
  }
  return matmul(matmul(matmul(matmul(dv, h), w), matmul(de, transpose(h))), dv);
}

// Smallest eigenvalue of a symmetric matrix by cyclic Jacobi rotations.
inline double min_eigenvalue(Dense a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = std::min(m, a[i][i]);
  return m;
}

struct Forward {
  Dense a1, h1, a2, z;
};

inline Forward forward(const Dense& hhat, const Dense& x, const Dense& t1, const Dense& t2) {
  Forward f;
  f.a1 = matmul(hhat, matmul(x, t1));
  f.h1 = f.a1;
  for (auto& r : f.h1)
    for (auto& v : r) v = v > 0.0 ? v : 0.0;
  f.a2 = matmul(hhat, matmul(f.h1, t2));
  f.z = f.a2;
  for (auto& r : f.z) {
    const double mx = *std::max_element(r.begin(), r.end());
    double s = 0.0;
    for (auto& v : r) s += std::exp(v - mx);
    for (auto& v : r) v = std::exp(v - mx) / s;
  }
  return f;
}

inline double loss(const Dense& z, const mghga::LabelData& l) {
  double s = 0.0;
  for (std::size_t u = 0; u < z.size(); ++u)
    if (l.train_mask[u]) s += -std::log(std::max(z[u][static_cast<std::size_t>(l.labels[u])], 1e-12));
  return s;
}

inline double loss(const Dense& hhat, const Dense& x, const Dense& t1, const Dense& t2,
                   const mghga::LabelData& l) {
  return loss(forward(hhat, x, t1, t2).z, l);
}

// dL/dX written out with explicit loops, independent of the library's
// backward pass.
inline Dense grad_x(const Dense& hhat, const Dense& x, const Dense& t1, const Dense& t2,
                    const mghga::LabelData& l) {
  const auto f = forward(hhat, x, t1, t2);
  const std::size_t n = x.size(), c = t2[0].size();
  Dense d2 = zeros(n, c);
  for (std::size_t u = 0; u < n; ++u)
    if (l.train_mask[u])
      for (std::size_t k = 0; k < c; ++k)
        d2[u][k] = f.z[u][k] - (static_cast<std::size_t>(l.labels[u]) == k ? 1.0 : 0.0);
  Dense dh1 = matmul(matmul(hhat, d2), transpose(t2));
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t k = 0; k < dh1[u].size(); ++k)
      if (!(f.a1[u][k] > 0.0)) dh1[u][k] = 0.0;
  return matmul(matmul(hhat, dh1), transpose(t1));
}

// Central finite difference of f at every entry of m.
template <class F>
Dense numeric_gradient(Dense m, F&& f, double step = 1e-5) {
  Dense g = zeros(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) {
      const double keep = m[i][j];
      m[i][j] = keep + step;
      const double up = f(m);
      m[i][j] = keep - step;
      const double down = f(m);
      m[i][j] = keep;
      g[i][j] = (up - down) / (2.0 * step);
    }
  return g;
}

// max |a - n| / max(|a|, |n|, floor)
inline double max_relative_error(const mghga::Matrix& analytic, const Dense& numeric, double floor = 1e-6) {
  double worst = 0.0;
  for (std::size_t i = 0; i < numeric.size(); ++i)
    for (std::size_t j = 0; j < numeric[i].size(); ++j) {
      const double a = analytic(i, j), n = numeric[i][j];
      worst = std::max(worst, std::abs(a - n) / std::max({std::abs(a), std::abs(n), floor}));
    }
  return worst;
}

// Step-by-step replay of the momentum attack: fresh gradient of the current
// features each step, F = mu F + grad, masked argmax |F| with row-major
// tie-break, one modification per step, clip at the end in continuous mode.
struct Replay {
  std::vector<mghga::Cell> cells;
  Dense x;
};

inline Replay replay_attack(const Dense& hhat, Dense x, const Dense& t1, const Dense& t2,
                            const mghga::LabelData& l, double mu, std::size_t budget, bool continuous,
                            double eta, const std::vector<std::vector<bool>>& eligible) {
  const std::size_t n = x.size(), d = x[0].size();
  double lo = x[0][0], hi = x[0][0];
  for (auto& r : x)
    for (double v : r) lo = std::min(lo, v), hi = std::max(hi, v);
  Dense f = zeros(n, d);
  auto open = eligible;
  Replay out;
  for (std::size_t step = 0; step < budget; ++step) {
    const Dense g = grad_x(hhat, x, t1, t2, l);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) f[i][j] = mu * f[i][j] + g[i][j];
    double best = -1.0;
    std::size_t bi = n, bj = d;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (open[i][j] && std::abs(f[i][j]) > best) best = std::abs(f[i][j]), bi = i, bj = j;
    if (bi == n) break;
    open[bi][bj] = false;
    if (continuous)
      x[bi][bj] += eta * (f[bi][bj] > 0.0 ? 1.0 : 0.0);
    else
      x[bi][bj] = 1.0 - x[bi][bj];
    out.cells.push_back({bi, bj});
  }
  if (continuous)
    for (auto& r : x)
      for (double& v : r) v = std::clamp(v, lo, hi);
  out.x = x;
  return out;
}

// Random instance helpers shared by unit and acceptance tests.
inline mghga::FeatureMatrix random_features(std::size_t n, std::size_t d, std::mt19937_64& rng, bool binary) {
  mghga::Matrix m(n, d);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : m.values()) v = binary ? (u(rng) < 0.4 ? 1.0 : 0.0) : u(rng);
  // keep every row non-empty so the instance is not degenerate
  if (binary)
    for (std::size_t i = 0; i < n; ++i) m(i, i % d) = 1.0;
  return mghga::FeatureMatrix(std::move(m));
}

inline mghga::Matrix random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double scale = 1.0) {
  mghga::Matrix m(r, c);
  std::normal_distribution<double> g(0.0, scale);
  for (double& v : m.values()) v = g(rng);
  return m;
}

inline mghga::LabelData random_labels(std::size_t n, std::size_t c, std::mt19937_64& rng) {
  mghga::LabelData l;
  l.n_classes = c;
  std::uniform_int_distribution<int> cls(0, static_cast<int>(c) - 1);
  for (std::size_t u = 0; u < n; ++u) {
    l.labels.push_back(cls(rng));
    const bool train = u % 3 != 2;
    l.train_mask.push_back(train ? 1 : 0);
    l.test_mask.push_back(train ? 0 : 1);
  }
  return l;
}

}  // namespace oracle
