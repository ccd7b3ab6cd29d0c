#include "mghga/attack.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mghga/errors.hpp"
#include "mghga/rng.hpp"

namespace mghga {

// ---------------------------------------------------------------------------
// enums
// ---------------------------------------------------------------------------

std::string to_string(FeatureMode m) { return m == FeatureMode::discrete ? "discrete" : "continuous"; }

std::string to_string(SignConvention s) { return s == SignConvention::binary ? "binary" : "symmetric"; }

std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::random: return "random";
    case AttackKind::nda: return "nda";
    case AttackKind::fga: return "fga";
    case AttackKind::fga_d: return "fga_d";
    case AttackKind::mghga: return "mghga";
    case AttackKind::mghga_d: return "mghga_d";
  }
  return "?";
}

FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "discrete") return FeatureMode::discrete;
  if (s == "continuous") return FeatureMode::continuous;
  throw ConfigError("feature mode must be discrete or continuous, got '" + s + "'");
}

SignConvention parse_sign_convention(const std::string& s) {
  if (s == "binary") return SignConvention::binary;
  if (s == "symmetric") return SignConvention::symmetric;
  throw ConfigError("sign convention must be binary or symmetric, got '" + s + "'");
}

AttackKind parse_attack_kind(const std::string& s) {
  for (auto k : {AttackKind::none, AttackKind::random, AttackKind::nda, AttackKind::fga,
                 AttackKind::fga_d, AttackKind::mghga, AttackKind::mghga_d})
    if (to_string(k) == s) return k;
  if (s == "fga-d") return AttackKind::fga_d;
  if (s == "mghga-d") return AttackKind::mghga_d;
  throw ConfigError("unknown attack '" + s + "'");
}

bool is_degree_constrained(AttackKind k) { return k == AttackKind::fga_d || k == AttackKind::mghga_d; }

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

std::size_t AttackConfig::budget(std::size_t n_nodes) const {
  if (!(budget_factor > 0.0) || !std::isfinite(budget_factor))
    throw ConfigError("budget factor must be positive");
  const double raw = std::floor(budget_factor * static_cast<double>(n_nodes));
  if (raw < 1.0)
    throw ConfigError("budget floor(" + std::to_string(budget_factor) + " * " + std::to_string(n_nodes) +
                      ") is zero");
  return static_cast<std::size_t>(raw);
}

void AttackConfig::validate(std::size_t n_nodes) const {
  budget(n_nodes);
  if (!(momentum >= 0.0) || !std::isfinite(momentum)) throw ConfigError("momentum decay must be >= 0");
  if (eta && !(*eta > 0.0)) throw ConfigError("eta must be positive");
  if (degree_top_fraction && !(*degree_top_fraction > 0.0 && *degree_top_fraction <= 1.0))
    throw ConfigError("degree top fraction must be in (0, 1]");
}

std::vector<Cell> AttackResult::cell_sequence() const {
  std::vector<Cell> out;
  out.reserve(modified_cells.size());
  for (const auto& c : modified_cells) out.push_back({c.node, c.feature});
  return out;
}

// ---------------------------------------------------------------------------
// masks and state
// ---------------------------------------------------------------------------

CellMask CellMask::from_rows(std::size_t rows, std::size_t cols, const std::vector<std::size_t>& row_ids) {
  CellMask m(rows, cols, false);
  for (std::size_t r : row_ids)
    for (std::size_t j = 0; j < cols; ++j) m.set(r, j, true);
  return m;
}

std::size_t CellMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

AttackState::AttackState(CellMask eligible, std::size_t budget)
    : momentum_(eligible.rows(), eligible.cols()),
      touched_(eligible.rows(), eligible.cols(), false),
      selectable_(std::move(eligible)),
      selectable_count_(selectable_.count()),
      budget_(budget) {}

void AttackState::record(Cell c) {
  if (used_ >= budget_) throw InvalidInput("attack budget already spent");
  if (touched_(c.node, c.feature))
    throw InvalidInput("cell (" + std::to_string(c.node) + ", " + std::to_string(c.feature) +
                       ") was already modified");
  if (!selectable_(c.node, c.feature)) throw InvalidInput("cell is not eligible");
  touched_.set(c.node, c.feature, true);
  selectable_.set(c.node, c.feature, false);
  --selectable_count_;
  ++used_;
}

// ---------------------------------------------------------------------------
// primitive steps
// ---------------------------------------------------------------------------

Matrix momentum_update(const Matrix& f_prev, const Matrix& grad, double mu) {
  Matrix f = f_prev;
  momentum_update_inplace(f, grad, mu);
  return f;
}

void momentum_update_inplace(Matrix& f, const Matrix& grad, double mu) {
  if (f.rows() != grad.rows() || f.cols() != grad.cols())
    throw DimensionError("momentum and gradient shapes differ");
  auto fv = f.values();
  auto gv = grad.values();
  for (std::size_t k = 0; k < fv.size(); ++k) fv[k] = mu * fv[k] + gv[k];
}

Cell select_feature(const Matrix& f, const CellMask& eligible) {
  if (f.rows() != eligible.rows() || f.cols() != eligible.cols())
    throw DimensionError("select_feature: mask shape differs from gradient");
  const double* fv = f.data();
  const std::uint8_t* mv = eligible.data();
  const std::size_t total = f.size();
  std::size_t best = total;
  double best_abs = -1.0;
  for (std::size_t k = 0; k < total; ++k) {
    if (!mv[k]) continue;
    const double a = std::abs(fv[k]);
    if (a > best_abs) {
      best_abs = a;
      best = k;
    }
  }
  if (best == total) throw SelectionError("no eligible feature cell left");
  return {best / f.cols(), best % f.cols()};
}

int sign(double x) { return x > 0.0 ? 1 : 0; }

int sign(double x, SignConvention convention) {
  if (convention == SignConvention::binary) return sign(x);
  return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0);
}

void modify_discrete(FeatureMatrix& x, Cell c) {
  const double v = x(c.node, c.feature);
  if (v != 0.0 && v != 1.0)
    throw ModeMismatch("discrete flip on non-binary value " + std::to_string(v));
  x.set(c.node, c.feature, 1.0 - v);
}

void modify_continuous(FeatureMatrix& x, Cell c, double eta, double gradient, SignConvention convention) {
  if (!(eta > 0.0)) throw InvalidParameter("eta must be positive");
  x.set(c.node, c.feature, x(c.node, c.feature) + eta * sign(gradient, convention));
}

void clip_features(FeatureMatrix& x, double lo, double hi) {
  if (lo > hi) throw InvalidParameter("clip range is empty");
  for (std::size_t i = 0; i < x.n_nodes(); ++i)
    for (std::size_t j = 0; j < x.n_features(); ++j) x.set(i, j, std::clamp(x(i, j), lo, hi));
}

double resolve_eta(const AttackConfig& cfg, const FeatureMatrix& clean) {
  if (cfg.eta) return *cfg.eta;
  const double avg = clean.mean_value();
  if (!(avg > 0.0)) throw ConfigError("automatic eta needs a positive mean feature value");
  return avg;
}

// ---------------------------------------------------------------------------
// eligibility
// ---------------------------------------------------------------------------

namespace {

std::vector<std::size_t> by_degree_desc(const Hypergraph& g) {
  std::vector<std::size_t> order(g.n_nodes());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& dv = g.node_degrees();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dv[a] > dv[b]; });
  return order;
}

}  // namespace

std::vector<std::size_t> top_degree_rows(const Hypergraph& g, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InvalidParameter("top fraction must be in (0, 1]");
  const auto n = g.n_nodes();
  auto keep = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  keep = std::clamp<std::size_t>(keep, 1, n);
  auto order = by_degree_desc(g);
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::size_t> max_degree_rows(const Hypergraph& g, std::size_t n_features, std::size_t budget) {
  const auto order = by_degree_desc(g);
  const auto& dv = g.node_degrees();
  std::vector<std::size_t> rows;
  std::size_t k = 0;
  while (k < order.size() && rows.size() * n_features < budget) {
    const double level = dv[order[k]];
    while (k < order.size() && dv[order[k]] == level) rows.push_back(order[k++]);
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

CellMask eligibility(const Hypergraph& g, std::size_t n_features, const AttackConfig& cfg) {
  if (!cfg.degree_top_fraction) return CellMask(g.n_nodes(), n_features, true);
  return CellMask::from_rows(g.n_nodes(), n_features, top_degree_rows(g, *cfg.degree_top_fraction));
}

// ---------------------------------------------------------------------------
// attacks
// ---------------------------------------------------------------------------

namespace {

void require_mode(const FeatureMatrix& x, FeatureMode mode) {
  if (mode == FeatureMode::discrete && !x.is_binary())
    throw ModeMismatch("discrete attack on a non-binary feature matrix");
}

AttackResult momentum_attack(const FeatureMatrix& x, const LabelData& labels, const Surrogate& s,
                             const AttackConfig& cfg, double mu) {
  cfg.validate(x.n_nodes());
  require_mode(x, cfg.mode);
  if (s.graph.n_nodes() != x.n_nodes()) throw DimensionError("surrogate graph and features differ in size");

  const std::size_t budget = cfg.budget(x.n_nodes());
  const double eta = cfg.mode == FeatureMode::continuous ? resolve_eta(cfg, x) : 0.0;
  AttackState state(eligibility(s.graph, x.n_features(), cfg), budget);
  AttackResult result{x, {}, 0, budget, false};
  FeatureMatrix& xt = result.perturbed;

  while (!state.done()) {
    const Matrix grad = grad_features(s.op, CsrMatrix::from_dense(xt.values()), s.params, labels);
    momentum_update_inplace(state.momentum(), grad, mu);
    const Cell c = select_feature(state.momentum(), state.selectable());
    const double old_value = xt(c.node, c.feature);
    if (cfg.mode == FeatureMode::discrete)
      modify_discrete(xt, c);
    else
      modify_continuous(xt, c, eta, state.momentum()(c.node, c.feature), cfg.sign);
    state.record(c);
    result.modified_cells.push_back({c.node, c.feature, old_value, xt(c.node, c.feature)});
  }

  if (cfg.mode == FeatureMode::continuous) {
    clip_features(xt, x.min_value(), x.max_value());
    for (auto& ch : result.modified_cells) ch.new_value = xt(ch.node, ch.feature);
  }
  result.modifications_used = state.used();
  result.exhausted = state.used() < budget;
  return result;
}

}  // namespace

AttackResult mghga_attack(const FeatureMatrix& x, const LabelData& labels, const Surrogate& surrogate,
                          const AttackConfig& cfg) {
  return momentum_attack(x, labels, surrogate, cfg, cfg.momentum);
}

AttackResult fga_attack(const FeatureMatrix& x, const LabelData& labels, const Surrogate& surrogate,
                        const AttackConfig& cfg) {
  return momentum_attack(x, labels, surrogate, cfg, 0.0);
}

AttackResult random_attack(const FeatureMatrix& x, const AttackConfig& cfg, const CellMask& eligible) {
  cfg.validate(x.n_nodes());
  require_mode(x, cfg.mode);
  if (eligible.rows() != x.n_nodes() || eligible.cols() != x.n_features())
    throw DimensionError("eligibility mask shape differs from features");

  const std::size_t budget = cfg.budget(x.n_nodes());
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < eligible.rows(); ++i)
    for (std::size_t j = 0; j < eligible.cols(); ++j)
      if (eligible(i, j)) pool.push_back(i * eligible.cols() + j);

  Rng rng = make_rng(cfg.seed, Stream::attack);
  const std::size_t take = std::min(budget, pool.size());
  // Partial Fisher-Yates: the first `take` slots become a uniform sample.
  for (std::size_t k = 0; k < take; ++k) {
    std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
    std::swap(pool[k], pool[pick(rng)]);
  }

  const double lo = x.min_value();
  const double hi = x.max_value();
  std::uniform_real_distribution<double> value(lo, hi);
  AttackResult result{x, {}, 0, budget, false};
  AttackState state(eligible, budget);
  for (std::size_t k = 0; k < take; ++k) {
    const Cell c{pool[k] / x.n_features(), pool[k] % x.n_features()};
    const double old_value = x(c.node, c.feature);
    if (cfg.mode == FeatureMode::discrete)
      modify_discrete(result.perturbed, c);
    else
      result.perturbed.set(c.node, c.feature, lo == hi ? lo : value(rng));
    state.record(c);
    result.modified_cells.push_back({c.node, c.feature, old_value, result.perturbed(c.node, c.feature)});
  }
  result.modifications_used = state.used();
  result.exhausted = state.used() < budget;
  return result;
}

AttackResult random_attack(const FeatureMatrix& x, const AttackConfig& cfg) {
  return random_attack(x, cfg, CellMask(x.n_nodes(), x.n_features(), true));
}

AttackResult nda_attack(const FeatureMatrix& x, const Hypergraph& surrogate_graph, const AttackConfig& cfg) {
  if (surrogate_graph.n_nodes() != x.n_nodes()) throw DimensionError("surrogate graph and features differ in size");
  const auto rows = max_degree_rows(surrogate_graph, x.n_features(), cfg.budget(x.n_nodes()));
  return random_attack(x, cfg, CellMask::from_rows(x.n_nodes(), x.n_features(), rows));
}

AttackResult run_attack(AttackKind kind, const FeatureMatrix& x, const LabelData& labels,
                        const Surrogate& surrogate, AttackConfig cfg) {
  if (is_degree_constrained(kind) && !cfg.degree_top_fraction)
    cfg.degree_top_fraction = AttackConfig::kDefaultTopFraction;
  switch (kind) {
    case AttackKind::none: {
      cfg.validate(x.n_nodes());
      return AttackResult{x, {}, 0, cfg.budget(x.n_nodes()), false};
    }
    case AttackKind::random:
      return random_attack(x, cfg, eligibility(surrogate.graph, x.n_features(), cfg));
    case AttackKind::nda:
      return nda_attack(x, surrogate.graph, cfg);
    case AttackKind::fga:
    case AttackKind::fga_d:
      return fga_attack(x, labels, surrogate, cfg);
    case AttackKind::mghga:
    case AttackKind::mghga_d:
      return mghga_attack(x, labels, surrogate, cfg);
  }
  throw ConfigError("unknown attack kind");
}

}  // namespace mghga
