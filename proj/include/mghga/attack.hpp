#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"
#include "mghga/matrix.hpp"

namespace mghga {

enum class FeatureMode { discrete, continuous };

// binary: sign(x) = 1 for x > 0, else 0 (features only ever increase).
// symmetric: the usual {-1, 0, +1} sign.
enum class SignConvention { binary, symmetric };

enum class AttackKind { none, random, nda, fga, fga_d, mghga, mghga_d };

std::string to_string(FeatureMode m);
std::string to_string(AttackKind k);
std::string to_string(SignConvention s);
FeatureMode parse_feature_mode(const std::string& s);
AttackKind parse_attack_kind(const std::string& s);
SignConvention parse_sign_convention(const std::string& s);

// Whether the attack only touches the top-degree rows by default.
bool is_degree_constrained(AttackKind k);

struct AttackConfig {
  double budget_factor = 0.05;  // lambda; budget = floor(lambda * |V|)
  double momentum = 0.8;        // mu
  std::optional<double> eta;    // step size; empty = mean clean feature value
  FeatureMode mode = FeatureMode::discrete;
  // Restrict rows to the ceil(fraction * |V|) highest-degree nodes.
  std::optional<double> degree_top_fraction;
  SignConvention sign = SignConvention::binary;
  std::uint64_t seed = 0;

  static constexpr double kDefaultTopFraction = 0.01;

  // Throws ConfigError unless the derived budget is at least one cell.
  std::size_t budget(std::size_t n_nodes) const;
  void validate(std::size_t n_nodes) const;
};

struct Cell {
  std::size_t node = 0;
  std::size_t feature = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

struct CellChange {
  std::size_t node = 0;
  std::size_t feature = 0;
  double old_value = 0.0;
  double new_value = 0.0;
  friend bool operator==(const CellChange&, const CellChange&) = default;
};

struct AttackResult {
  FeatureMatrix perturbed;
  std::vector<CellChange> modified_cells;
  std::size_t modifications_used = 0;
  std::size_t budget = 0;
  // Set when the eligible cells ran out before the budget was spent.
  bool exhausted = false;

  std::vector<Cell> cell_sequence() const;
};

// Boolean |V| x d mask over feature cells.
class CellMask {
 public:
  CellMask(std::size_t rows, std::size_t cols, bool value = true)
      : rows_(rows), cols_(cols), bits_(rows * cols, value ? 1 : 0) {}
  // Every cell of the listed rows.
  static CellMask from_rows(std::size_t rows, std::size_t cols, const std::vector<std::size_t>& row_ids);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool operator()(std::size_t i, std::size_t j) const noexcept { return bits_[i * cols_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool v) noexcept { bits_[i * cols_ + j] = v ? 1 : 0; }
  std::size_t count() const;
  const std::uint8_t* data() const noexcept { return bits_.data(); }

 private:
  std::size_t rows_, cols_;
  std::vector<std::uint8_t> bits_;
};

// Bookkeeping for one attack run: momentum, touched cells, remaining budget.
class AttackState {
 public:
  AttackState(CellMask eligible, std::size_t budget);

  Matrix& momentum() noexcept { return momentum_; }
  const Matrix& momentum() const noexcept { return momentum_; }
  // Eligible and not yet touched.
  const CellMask& selectable() const noexcept { return selectable_; }
  std::size_t selectable_count() const noexcept { return selectable_count_; }
  bool touched(Cell c) const { return touched_(c.node, c.feature); }
  std::size_t used() const noexcept { return used_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t iteration() const noexcept { return used_; }
  bool done() const noexcept { return used_ >= budget_ || selectable_count_ == 0; }

  // Spends one unit of budget on c. Throws InvalidInput when c was already
  // touched, is not eligible, or the budget is gone.
  void record(Cell c);

 private:
  Matrix momentum_;
  CellMask touched_;
  CellMask selectable_;
  std::size_t selectable_count_;
  std::size_t used_ = 0;
  std::size_t budget_;
};

// The surrogate the attacker trains once on clean data.
struct Surrogate {
  Hypergraph graph;
  NormalizedOperator op;
  ModelParams params;
};

// mu * f_prev + grad
Matrix momentum_update(const Matrix& f_prev, const Matrix& grad, double mu);
// In-place variant used by the attack loop.
void momentum_update_inplace(Matrix& f, const Matrix& grad, double mu);

// Eligible cell with the largest |F|; ties go to the smallest (node, feature).
Cell select_feature(const Matrix& f, const CellMask& eligible);

// 1 when x > 0, otherwise 0.
int sign(double x);
int sign(double x, SignConvention convention);

void modify_discrete(FeatureMatrix& x, Cell c);
void modify_continuous(FeatureMatrix& x, Cell c, double eta, double gradient,
                       SignConvention convention = SignConvention::binary);

// Clamp every entry into [lo, hi].
void clip_features(FeatureMatrix& x, double lo, double hi);

// cfg.eta, or the mean of the clean matrix when unset.
double resolve_eta(const AttackConfig& cfg, const FeatureMatrix& clean);

// ceil(fraction * |V|) highest-Dv nodes, ties to the lower index.
std::vector<std::size_t> top_degree_rows(const Hypergraph& g, double fraction);

// Degree levels in descending order, whole levels at a time, until the rows
// hold at least `budget` cells.
std::vector<std::size_t> max_degree_rows(const Hypergraph& g, std::size_t n_features,
                                         std::size_t budget);

// Rows an attack may touch under cfg.degree_top_fraction (all rows if unset).
CellMask eligibility(const Hypergraph& g, std::size_t n_features, const AttackConfig& cfg);

AttackResult mghga_attack(const FeatureMatrix& x, const LabelData& labels, const Surrogate& surrogate,
                          const AttackConfig& cfg);
AttackResult fga_attack(const FeatureMatrix& x, const LabelData& labels, const Surrogate& surrogate,
                        const AttackConfig& cfg);
AttackResult random_attack(const FeatureMatrix& x, const AttackConfig& cfg);
AttackResult random_attack(const FeatureMatrix& x, const AttackConfig& cfg, const CellMask& eligible);
AttackResult nda_attack(const FeatureMatrix& x, const Hypergraph& surrogate_graph, const AttackConfig& cfg);

// Dispatches on kind. The -D kinds default degree_top_fraction to 1%.
AttackResult run_attack(AttackKind kind, const FeatureMatrix& x, const LabelData& labels,
                        const Surrogate& surrogate, AttackConfig cfg);

}  // namespace mghga
