#include "mghga/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <sstream>

#include "mghga/errors.hpp"
#include "mghga/rng.hpp"

namespace mghga::experiment {

using nlohmann::json;

// ---------------------------------------------------------------------------
// config
// ---------------------------------------------------------------------------

void ExperimentConfig::validate() const {
  if (dataset.empty()) throw ConfigError("no dataset given");
  if (n_repeats < 1) throw ConfigError("repeats must be at least 1");
  train_cfg.validate();
  split.validate();
  if (subsample && *subsample < 2) throw ConfigError("subsample needs at least two nodes");
  // Node-count dependent checks (budget >= 1) happen once the dataset is loaded.
  if (!(attack_cfg.budget_factor > 0.0)) throw ConfigError("budget factor must be positive");
  if (!(attack_cfg.momentum >= 0.0)) throw ConfigError("momentum decay must be >= 0");
  if (attack_cfg.eta && !(*attack_cfg.eta > 0.0)) throw ConfigError("eta must be positive");
}

json ExperimentConfig::to_json() const {
  json j;
  j["dataset"] = dataset;
  j["surrogate_construction"] = surrogate_construction.to_string();
  j["victim_construction"] = victim_construction.to_string();
  j["attack"] = to_string(attack);
  j["lambda"] = attack_cfg.budget_factor;
  j["mu"] = attack_cfg.momentum;
  j["eta"] = attack_cfg.eta ? json(*attack_cfg.eta) : json("auto");
  j["top_fraction"] = attack_cfg.degree_top_fraction ? json(*attack_cfg.degree_top_fraction) : json(nullptr);
  j["sign"] = to_string(attack_cfg.sign);
  j["epochs"] = train_cfg.epochs;
  j["learning_rate"] = train_cfg.learning_rate;
  j["hidden_dim"] = train_cfg.hidden_dim;
  j["dropout"] = train_cfg.dropout_rate;
  j["train_fraction"] = split.train_fraction;
  j["test_fraction"] = split.test_fraction;
  j["repeats"] = n_repeats;
  j["seed"] = seed;
  j["subsample"] = subsample ? json(*subsample) : json(nullptr);
  j["subsample_seed"] = subsample_seed;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  ExperimentConfig c;
  try {
    c.dataset = j.at("dataset").get<std::string>();
    c.surrogate_construction = Construction::parse(j.at("surrogate_construction").get<std::string>());
    c.victim_construction = Construction::parse(j.at("victim_construction").get<std::string>());
    c.attack = parse_attack_kind(j.at("attack").get<std::string>());
    c.attack_cfg.budget_factor = j.at("lambda").get<double>();
    c.attack_cfg.momentum = j.at("mu").get<double>();
    const auto& eta = j.at("eta");
    if (!eta.is_string()) c.attack_cfg.eta = eta.get<double>();
    const auto& top = j.at("top_fraction");
    if (!top.is_null()) c.attack_cfg.degree_top_fraction = top.get<double>();
    c.attack_cfg.sign = parse_sign_convention(j.at("sign").get<std::string>());
    c.train_cfg.epochs = j.at("epochs").get<int>();
    c.train_cfg.learning_rate = j.at("learning_rate").get<double>();
    c.train_cfg.hidden_dim = j.at("hidden_dim").get<std::size_t>();
    c.train_cfg.dropout_rate = j.at("dropout").get<double>();
    c.split.train_fraction = j.at("train_fraction").get<double>();
    c.split.test_fraction = j.at("test_fraction").get<double>();
    c.n_repeats = j.at("repeats").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& sub = j.at("subsample");
    if (!sub.is_null()) c.subsample = sub.get<std::size_t>();
    c.subsample_seed = j.at("subsample_seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("experiment config: ") + e.what());
  }
  return c;
}

// ---------------------------------------------------------------------------
// records
// ---------------------------------------------------------------------------

json RepeatRecord::to_json() const {
  json cells = json::array();
  for (const auto& c : modified_cells) cells.push_back({c.node, c.feature});
  json j{{"type", "repeat"}, {"index", index}, {"seed", seed}, {"status", ok ? "ok" : "failed"}};
  if (!ok) j["error"] = error;
  j["clean_accuracy"] = clean_accuracy;
  j["attacked_accuracy"] = attacked_accuracy;
  j["budget"] = budget;
  j["modifications_used"] = modifications_used;
  j["exhausted"] = exhausted;
  j["modified_cells"] = std::move(cells);
  j["wall_time_s"] = wall_time_s;
  return j;
}

RepeatRecord RepeatRecord::from_json(const json& j) {
  RepeatRecord r;
  r.index = j.at("index").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.ok = j.at("status").get<std::string>() == "ok";
  r.error = j.value("error", std::string());
  r.clean_accuracy = j.at("clean_accuracy").get<double>();
  r.attacked_accuracy = j.at("attacked_accuracy").get<double>();
  r.budget = j.at("budget").get<std::size_t>();
  r.modifications_used = j.at("modifications_used").get<std::size_t>();
  r.exhausted = j.at("exhausted").get<bool>();
  for (const auto& c : j.at("modified_cells")) r.modified_cells.push_back({c.at(0).get<std::size_t>(), c.at(1).get<std::size_t>()});
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

json Aggregate::to_json() const {
  return json{{"type", "aggregate"},     {"n_ok", n_ok},
              {"n_failed", n_failed},    {"clean_mean", clean_mean},
              {"clean_std", clean_std},  {"attacked_mean", attacked_mean},
              {"attacked_std", attacked_std}};
}

Aggregate aggregate(const std::vector<RepeatRecord>& repeats) {
  Aggregate a;
  std::vector<double> clean, attacked;
  for (const auto& r : repeats) {
    if (!r.ok) {
      ++a.n_failed;
      continue;
    }
    ++a.n_ok;
    clean.push_back(r.clean_accuracy);
    attacked.push_back(r.attacked_accuracy);
  }
  auto stats = [](const std::vector<double>& v, double& mean, double& sd) {
    mean = sd = 0.0;
    if (v.empty()) return;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2) return;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  };
  stats(clean, a.clean_mean, a.clean_std);
  stats(attacked, a.attacked_mean, a.attacked_std);
  return a;
}

std::string ExperimentReport::to_jsonl(const json& tag) const {
  auto tagged = [&](json j) {
    if (!tag.is_null()) j["tag"] = tag;
    return j.dump() + "\n";
  };
  json cfg = config;
  cfg["type"] = "config";
  std::string out = tagged(cfg);
  for (const auto& r : repeats) out += tagged(r.to_json());
  out += tagged(aggregate.to_json());
  return out;
}

ExperimentReport ExperimentReport::from_jsonl(const std::string& text) {
  ExperimentReport rep;
  std::istringstream in(text);
  std::string line;
  bool have_aggregate = false;
  try {
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json j = json::parse(line);
      const auto type = j.at("type").get<std::string>();
      if (type == "config") {
        j.erase("type");
        j.erase("tag");
        rep.config = j;
      } else if (type == "repeat") {
        rep.repeats.push_back(RepeatRecord::from_json(j));
      } else if (type == "aggregate") {
        rep.aggregate.n_ok = j.at("n_ok").get<std::size_t>();
        rep.aggregate.n_failed = j.at("n_failed").get<std::size_t>();
        rep.aggregate.clean_mean = j.at("clean_mean").get<double>();
        rep.aggregate.clean_std = j.at("clean_std").get<double>();
        rep.aggregate.attacked_mean = j.at("attacked_mean").get<double>();
        rep.aggregate.attacked_std = j.at("attacked_std").get<double>();
        have_aggregate = true;
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  if (!have_aggregate) throw ParseError("report has no aggregate line");
  return rep;
}

// ---------------------------------------------------------------------------
// running
// ---------------------------------------------------------------------------

io::Dataset subsample_dataset(const io::Dataset& ds, std::size_t n, std::uint64_t seed) {
  const std::size_t total = ds.features.n_nodes();
  if (n >= total) return ds;
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, 0x5ab5));
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(n);
  std::sort(order.begin(), order.end());

  Matrix x(n, ds.features.n_features());
  std::vector<int> labels(n);
  for (std::size_t k = 0; k < n; ++k) {
    auto src = ds.features.values().row(order[k]);
    std::copy(src.begin(), src.end(), x.row(k).begin());
    labels[k] = ds.labels[order[k]];
  }
  io::Dataset out = ds;
  out.name = ds.name + "-sub" + std::to_string(n);
  out.features = FeatureMatrix(std::move(x));
  out.labels = std::move(labels);
  return out;
}

io::Dataset load_experiment_dataset(const ExperimentConfig& cfg) {
  io::Dataset ds = io::load_dataset(cfg.dataset);
  if (cfg.subsample) ds = subsample_dataset(ds, *cfg.subsample, cfg.subsample_seed);
  return ds;
}

SeedPlan SeedPlan::from(std::uint64_t seed) {
  return {seed, derive_seed(seed, static_cast<std::uint64_t>(Stream::surrogate)),
          derive_seed(seed, static_cast<std::uint64_t>(Stream::victim)),
          derive_seed(seed, static_cast<std::uint64_t>(Stream::attack))};
}

LabelData split_labels(const io::Dataset& ds, const io::SplitSpec& spec, std::uint64_t seed) {
  io::SplitSpec s = spec;
  s.seed = seed;
  return io::make_label_data(ds, io::make_split(ds.features.n_nodes(), s));
}

Surrogate train_surrogate(const FeatureMatrix& x, const LabelData& labels, const Construction& c,
                          TrainConfig cfg, std::uint64_t train_seed) {
  Hypergraph g = build_hypergraph(x, c);
  NormalizedOperator op = normalized_operator(g);
  cfg.seed = train_seed;
  ModelParams p = train(op, x, labels, cfg);
  return {std::move(g), std::move(op), std::move(p)};
}

double victim_accuracy(const FeatureMatrix& x, const LabelData& labels, const Construction& c, TrainConfig cfg,
                       std::uint64_t train_seed) {
  const NormalizedOperator op = normalized_operator(build_hypergraph(x, c));
  cfg.seed = train_seed;
  const ModelParams p = train(op, x, labels, cfg);
  return accuracy(predict(forward(op, x, p)), labels, Split::test);
}

namespace {

struct Graph {
  Hypergraph graph;
  NormalizedOperator op;
};

Graph make_graph(const FeatureMatrix& x, const Construction& c) {
  Hypergraph g = build_hypergraph(x, c);
  NormalizedOperator op = normalized_operator(g);
  return {std::move(g), std::move(op)};
}

// Holds the loaded dataset and the clean-feature hypergraphs, which every
// repeat shares.
class Runner {
 public:
  explicit Runner(const ExperimentConfig& cfg) : cfg_(cfg), ds_(load_experiment_dataset(cfg)) {
    cfg_.attack_cfg.mode = ds_.mode;
    cfg_.attack_cfg.validate(ds_.features.n_nodes());
    if (cfg_.attack == AttackKind::mghga_d || cfg_.attack == AttackKind::fga_d) {
      if (!cfg_.attack_cfg.degree_top_fraction) cfg_.attack_cfg.degree_top_fraction = AttackConfig::kDefaultTopFraction;
    }
  }

  const io::Dataset& dataset() const { return ds_; }

  RepeatRecord run(int index, std::uint64_t seed) {
    const auto t0 = std::chrono::steady_clock::now();
    RepeatRecord rec;
    rec.index = index;
    rec.seed = seed;
    try {
      run_inner(seed, rec);
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
  }

 private:
  const Graph& clean_graph(const Construction& c) {
    const std::string key = c.to_string();
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, std::make_unique<Graph>(make_graph(ds_.features, c))).first;
    return *it->second;
  }

  void run_inner(std::uint64_t seed, RepeatRecord& rec) {
    const FeatureMatrix& x = ds_.features;
    const SeedPlan seeds = SeedPlan::from(seed);
    const LabelData labels = split_labels(ds_, cfg_.split, seeds.split);

    TrainConfig surrogate_train = cfg_.train_cfg;
    surrogate_train.seed = seeds.surrogate;
    TrainConfig victim_train = cfg_.train_cfg;
    victim_train.seed = seeds.victim;
    AttackConfig attack_cfg = cfg_.attack_cfg;
    attack_cfg.seed = seeds.attack;

    // Surrogate: clean features, surrogate construction.
    const Graph& sg = clean_graph(cfg_.surrogate_construction);
    AttackResult attacked;
    if (cfg_.attack == AttackKind::none) {
      attacked = AttackResult{x, {}, 0, attack_cfg.budget(x.n_nodes()), false};
    } else {
      Surrogate surrogate{sg.graph, sg.op, {}};
      if (cfg_.attack != AttackKind::random && cfg_.attack != AttackKind::nda)
        surrogate.params = train(sg.op, x, labels, surrogate_train);
      attacked = run_attack(cfg_.attack, x, labels, surrogate, attack_cfg);
    }
    rec.budget = attacked.budget;
    rec.modifications_used = attacked.modifications_used;
    rec.exhausted = attacked.exhausted;
    rec.modified_cells = attacked.cell_sequence();

    // Clean victim.
    const Graph& cg = clean_graph(cfg_.victim_construction);
    const ModelParams clean_params = train(cg.op, x, labels, victim_train);
    rec.clean_accuracy = accuracy(predict(forward(cg.op, x, clean_params)), labels, Split::test);

    // Poisoned victim: hypergraph rebuilt from the perturbed features.
    if (attacked.perturbed == x) {
      rec.attacked_accuracy = rec.clean_accuracy;
    } else {
      rec.attacked_accuracy =
          victim_accuracy(attacked.perturbed, labels, cfg_.victim_construction, cfg_.train_cfg, seeds.victim);
    }
  }

  ExperimentConfig cfg_;
  io::Dataset ds_;
  std::map<std::string, std::unique_ptr<Graph>> cache_;
};

}  // namespace

RepeatRecord run_single(const ExperimentConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Runner runner(cfg);
  return runner.run(0, seed);
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  Runner runner(cfg);
  ExperimentReport rep;
  rep.config = cfg.to_json();
  for (int r = 0; r < cfg.n_repeats; ++r) rep.repeats.push_back(runner.run(r, cfg.seed + static_cast<std::uint64_t>(r)));
  rep.aggregate = aggregate(rep.repeats);
  return rep;
}

SweepAxis parse_sweep_axis(const std::string& s) {
  if (s == "lambda" || s == "budget") return SweepAxis::budget;
  if (s == "K" || s == "k") return SweepAxis::k;
  if (s == "eps" || s == "epsilon") return SweepAxis::epsilon;
  if (s == "mu" || s == "momentum") return SweepAxis::momentum;
  throw ConfigError("sweep axis must be lambda, K, eps or mu, got '" + s + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::budget: return "lambda";
    case SweepAxis::k: return "K";
    case SweepAxis::epsilon: return "eps";
    case SweepAxis::momentum: return "mu";
  }
  return "?";
}

ExperimentConfig with_axis(ExperimentConfig cfg, SweepAxis axis, double value) {
  bool applied = true;
  switch (axis) {
    case SweepAxis::budget:
      cfg.attack_cfg.budget_factor = value;
      break;
    case SweepAxis::momentum:
      cfg.attack_cfg.momentum = value;
      break;
    case SweepAxis::k: {
      if (!(value >= 1.0) || value != std::floor(value)) throw ConfigError("K sweep values must be positive integers");
      applied = false;
      for (Construction* c : {&cfg.surrogate_construction, &cfg.victim_construction})
        if (c->kind == ConstructionKind::knn) {
          c->k = static_cast<std::size_t>(value);
          applied = true;
        }
      break;
    }
    case SweepAxis::epsilon: {
      applied = false;
      for (Construction* c : {&cfg.surrogate_construction, &cfg.victim_construction})
        if (c->kind == ConstructionKind::epsilon) {
          c->epsilon = value;
          applied = true;
        }
      break;
    }
  }
  if (!applied) throw ConfigError("sweep axis " + to_string(axis) + " does not apply to the chosen constructions");
  return cfg;
}

std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& values) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<ExperimentConfig> cfgs;
  for (double v : values) cfgs.push_back(with_axis(cfg, axis, v));
  std::vector<ExperimentReport> out;
  for (const auto& c : cfgs) out.push_back(run_experiment(c));
  return out;
}

std::string sweep_to_jsonl(SweepAxis axis, const std::vector<double>& values,
                           const std::vector<ExperimentReport>& reports) {
  std::string out;
  json table = json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const json tag{{"axis", to_string(axis)}, {"value", values[k]}};
    out += reports[k].to_jsonl(tag);
    table.push_back({{"value", values[k]},
                     {"clean_mean", reports[k].aggregate.clean_mean},
                     {"clean_std", reports[k].aggregate.clean_std},
                     {"attacked_mean", reports[k].aggregate.attacked_mean},
                     {"attacked_std", reports[k].aggregate.attacked_std}});
  }
  out += json{{"type", "sweep_table"}, {"axis", to_string(axis)}, {"rows", table}}.dump() + "\n";
  return out;
}

std::vector<std::vector<ExperimentReport>> transfer_matrix(const ExperimentConfig& cfg,
                                                           const std::vector<Construction>& surrogates,
                                                           const std::vector<Construction>& victims) {
  if (surrogates.empty() || victims.empty()) throw ConfigError("transfer needs at least one construction per axis");
  std::vector<std::vector<ExperimentReport>> out;
  for (const auto& s : surrogates) {
    std::vector<ExperimentReport> row;
    for (const auto& v : victims) {
      ExperimentConfig c = cfg;
      c.surrogate_construction = s;
      c.victim_construction = v;
      row.push_back(run_experiment(c));
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string transfer_to_jsonl(const std::vector<Construction>& surrogates, const std::vector<Construction>& victims,
                              const std::vector<std::vector<ExperimentReport>>& reports) {
  std::string out;
  json cells = json::array();
  for (std::size_t s = 0; s < surrogates.size(); ++s) {
    for (std::size_t v = 0; v < victims.size(); ++v) {
      const auto& r = reports[s][v];
      const json tag{{"surrogate", surrogates[s].to_string()}, {"victim", victims[v].to_string()}};
      out += r.to_jsonl(tag);
      cells.push_back({{"surrogate", surrogates[s].to_string()},
                       {"victim", victims[v].to_string()},
                       {"clean_mean", r.aggregate.clean_mean},
                       {"attacked_mean", r.aggregate.attacked_mean}});
    }
  }
  out += json{{"type", "transfer_table"}, {"cells", cells}}.dump() + "\n";
  return out;
}

}  // namespace mghga::experiment
