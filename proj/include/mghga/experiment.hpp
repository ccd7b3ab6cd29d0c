#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mghga/attack.hpp"
#include "mghga/data_io.hpp"
#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"

// Poisoning protocol: surrogate trained once on clean data, attack, victim
// retrained from scratch on the perturbed features, accuracy compared against
// a victim trained on the clean features with the same split and seed.
namespace mghga::experiment {

struct ExperimentConfig {
  std::string dataset;  // manifest path
  Construction surrogate_construction = Construction::knn(10);
  Construction victim_construction = Construction::knn(10);
  AttackKind attack = AttackKind::mghga;
  AttackConfig attack_cfg;
  TrainConfig train_cfg;
  io::SplitSpec split;  // split.seed is replaced per repeat
  int n_repeats = 10;
  std::uint64_t seed = 0;
  // Optional deterministic node subsample applied right after loading.
  std::optional<std::size_t> subsample;
  std::uint64_t subsample_seed = 0;

  void validate() const;
  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct RepeatRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  double clean_accuracy = 0.0;
  double attacked_accuracy = 0.0;
  std::size_t budget = 0;
  std::size_t modifications_used = 0;
  bool exhausted = false;
  std::vector<Cell> modified_cells;
  double wall_time_s = 0.0;

  nlohmann::json to_json() const;
  static RepeatRecord from_json(const nlohmann::json& j);
};

struct Aggregate {
  std::size_t n_ok = 0;
  std::size_t n_failed = 0;
  double clean_mean = 0.0;
  double clean_std = 0.0;
  double attacked_mean = 0.0;
  double attacked_std = 0.0;

  nlohmann::json to_json() const;
};

struct ExperimentReport {
  nlohmann::json config;
  std::vector<RepeatRecord> repeats;
  Aggregate aggregate;

  // One JSON object per line: config, each repeat, aggregate.
  std::string to_jsonl(const nlohmann::json& tag = nullptr) const;
  static ExperimentReport from_jsonl(const std::string& text);
};

// Seeds a repeat derives from its base seed; the CLI subcommands use the same
// plan so that `attack` + `eval` reproduce what `run` does.
struct SeedPlan {
  std::uint64_t split;
  std::uint64_t surrogate;
  std::uint64_t victim;
  std::uint64_t attack;

  static SeedPlan from(std::uint64_t seed);
};

LabelData split_labels(const io::Dataset& ds, const io::SplitSpec& spec, std::uint64_t seed);

// Builds the hypergraph from x and trains a surrogate on it.
Surrogate train_surrogate(const FeatureMatrix& x, const LabelData& labels, const Construction& c,
                          TrainConfig cfg, std::uint64_t train_seed);

// Trains a fresh model on x (hypergraph rebuilt from x) and returns its test accuracy.
double victim_accuracy(const FeatureMatrix& x, const LabelData& labels, const Construction& c, TrainConfig cfg,
                       std::uint64_t train_seed);

// Mean and sample standard deviation over the successful repeats.
Aggregate aggregate(const std::vector<RepeatRecord>& repeats);

// Dataset as the experiment sees it (after the optional subsample).
io::Dataset load_experiment_dataset(const ExperimentConfig& cfg);
io::Dataset subsample_dataset(const io::Dataset& ds, std::size_t n, std::uint64_t seed);

RepeatRecord run_single(const ExperimentConfig& cfg, std::uint64_t seed);
ExperimentReport run_experiment(const ExperimentConfig& cfg);

enum class SweepAxis { budget, k, epsilon, momentum };
SweepAxis parse_sweep_axis(const std::string& s);
std::string to_string(SweepAxis a);

// Copy of cfg with the axis set to value.
ExperimentConfig with_axis(ExperimentConfig cfg, SweepAxis axis, double value);

std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values);
std::string sweep_to_jsonl(SweepAxis axis, const std::vector<double>& values,
                           const std::vector<ExperimentReport>& reports);

// reports[s][v] for surrogate construction s and victim construction v.
std::vector<std::vector<ExperimentReport>> transfer_matrix(const ExperimentConfig& cfg,
                                                           const std::vector<Construction>& surrogates,
                                                           const std::vector<Construction>& victims);
std::string transfer_to_jsonl(const std::vector<Construction>& surrogates, const std::vector<Construction>& victims,
                              const std::vector<std::vector<ExperimentReport>>& reports);

}  // namespace mghga::experiment
