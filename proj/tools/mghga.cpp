// mghga: command-line front end for hypergraph construction, HGNN training,
// feature-poisoning attacks and the experiment harness.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mghga/attack.hpp"
#include "mghga/data_io.hpp"
#include "mghga/errors.hpp"
#include "mghga/experiment.hpp"
#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"
#include "mghga/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mghga;

namespace {

struct Options {
  std::string dataset;
  std::string construction = "knn:10";
  std::string victim_construction;
  std::string attack = "mghga";
  double lambda = 0.05;
  double mu = 0.8;
  std::string eta = "auto";
  std::optional<double> top_fraction;
  std::string sign = "binary";
  int repeats = 10;
  std::uint64_t seed = 0;
  std::string out;
  int epochs = 300;
  double lr = 0.001;
  std::size_t hidden = 64;
  double dropout = 0.5;
  double train_fraction = 0.2;
  double test_fraction = 0.8;
  std::optional<std::size_t> subsample;
  std::uint64_t subsample_seed = 0;
  std::string config;
};

void add_dataset(CLI::App* cmd, Options& o) {
  cmd->add_option("--dataset", o.dataset, "Path to a dataset manifest.json")->required();
}

void add_construction(CLI::App* cmd, Options& o) {
  cmd->add_option("--construction", o.construction, "Hypergraph construction knn:K or eps:E")
      ->capture_default_str();
}

void add_training(CLI::App* cmd, Options& o) {
  cmd->add_option("--seed", o.seed, "Base seed")->capture_default_str();
  cmd->add_option("--epochs", o.epochs, "Training epochs")->capture_default_str();
  cmd->add_option("--lr", o.lr, "Adam learning rate")->capture_default_str();
  cmd->add_option("--hidden", o.hidden, "Hidden dimension")->capture_default_str();
  cmd->add_option("--dropout", o.dropout, "Dropout rate")->capture_default_str();
  cmd->add_option("--train-fraction", o.train_fraction)->capture_default_str();
  cmd->add_option("--test-fraction", o.test_fraction)->capture_default_str();
}

void add_attack(CLI::App* cmd, Options& o) {
  cmd->add_option("--attack", o.attack, "none|random|nda|fga|fga_d|mghga|mghga_d")->capture_default_str();
  cmd->add_option("--lambda", o.lambda, "Budget factor; budget = floor(lambda * |V|)")->capture_default_str();
  cmd->add_option("--mu", o.mu, "Momentum decay")->capture_default_str();
  cmd->add_option("--eta", o.eta, "Continuous step size: auto or a value")->capture_default_str();
  cmd->add_option("--top-fraction", o.top_fraction, "Restrict to the top-degree fraction of nodes");
  cmd->add_option("--sign", o.sign, "binary|symmetric sign convention")->capture_default_str();
}

void add_experiment(CLI::App* cmd, Options& o) {
  add_construction(cmd, o);
  cmd->add_option("--dataset", o.dataset, "Path to a dataset manifest.json");
  cmd->add_option("--victim-construction", o.victim_construction, "Victim construction (defaults to --construction)");
  add_attack(cmd, o);
  add_training(cmd, o);
  cmd->add_option("--repeats", o.repeats, "Number of repeats")->capture_default_str();
  cmd->add_option("--subsample", o.subsample, "Use a seeded subsample of this many nodes");
  cmd->add_option("--subsample-seed", o.subsample_seed)->capture_default_str();
  cmd->add_option("--config", o.config, "Experiment config JSON (or a report whose first line is the config)");
  cmd->add_option("--out", o.out, "Report path (stdout if omitted)");
}

TrainConfig train_config(const Options& o) {
  TrainConfig t;
  t.epochs = o.epochs;
  t.learning_rate = o.lr;
  t.hidden_dim = o.hidden;
  t.dropout_rate = o.dropout;
  t.validate();
  return t;
}

io::SplitSpec split_spec(const Options& o) { return {o.train_fraction, o.test_fraction, o.seed}; }

AttackConfig attack_config(const Options& o) {
  AttackConfig a;
  a.budget_factor = o.lambda;
  a.momentum = o.mu;
  if (o.eta != "auto") {
    try {
      a.eta = std::stod(o.eta);
    } catch (const std::exception&) {
      throw ConfigError("--eta must be 'auto' or a number");
    }
  }
  a.degree_top_fraction = o.top_fraction;
  a.sign = parse_sign_convention(o.sign);
  return a;
}

experiment::ExperimentConfig experiment_config(const Options& o) {
  if (!o.config.empty()) {
    std::istringstream in(io::read_file(o.config));
    std::string first;
    std::getline(in, first);
    json j;
    try {
      j = json::parse(first);
    } catch (const json::parse_error&) {
      j = json::parse(io::read_file(o.config));
    }
    return experiment::ExperimentConfig::from_json(j);
  }
  if (o.dataset.empty()) throw ConfigError("--dataset is required (or --config)");
  experiment::ExperimentConfig c;
  c.dataset = o.dataset;
  c.surrogate_construction = Construction::parse(o.construction);
  c.victim_construction = o.victim_construction.empty() ? c.surrogate_construction
                                                        : Construction::parse(o.victim_construction);
  c.attack = parse_attack_kind(o.attack);
  c.attack_cfg = attack_config(o);
  c.train_cfg = train_config(o);
  c.split = split_spec(o);
  c.n_repeats = o.repeats;
  c.seed = o.seed;
  c.subsample = o.subsample;
  c.subsample_seed = o.subsample_seed;
  c.validate();
  return c;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    const fs::path p(out_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    io::write_file_atomic(p, text);
  }
}

std::vector<double> parse_values(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      out.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw ConfigError("bad sweep value '" + tok + "'");
    }
  }
  if (out.empty()) throw ConfigError("no sweep values given");
  return out;
}

std::vector<Construction> parse_constructions(const std::string& s) {
  std::vector<Construction> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(Construction::parse(tok));
  if (out.empty()) throw ConfigError("no constructions given");
  return out;
}

// --- convert -----------------------------------------------------------------

struct ConvertOptions {
  std::string format = "linqs";
  std::string content;
  std::string cites;
  bool lcc = false;
  std::vector<std::string> features;
  std::string labels;
  std::string mode = "continuous";
  std::string name = "dataset";
  std::string out;
};

// LINQS citation format: `<id> <binary word flags...> <label>` per line, and
// optionally `<cited> <citing>` pairs used to keep the largest connected
// component.
io::Dataset convert_linqs(const ConvertOptions& c) {
  std::ifstream in(c.content);
  if (!in) throw IoError("cannot open " + c.content);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> raw_labels;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string t;
    while (ls >> t) toks.push_back(t);
    if (toks.empty()) continue;
    if (toks.size() < 3) throw ParseError(c.content + ": short line");
    ids.push_back(toks.front());
    raw_labels.push_back(toks.back());
    std::vector<double> r;
    for (std::size_t k = 1; k + 1 < toks.size(); ++k) r.push_back(std::stod(toks[k]));
    if (!rows.empty() && r.size() != rows.front().size()) throw ShapeError(c.content + ": ragged feature rows");
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw ParseError(c.content + ": no rows");

  std::vector<std::size_t> keep(rows.size());
  std::iota(keep.begin(), keep.end(), std::size_t{0});
  if (c.lcc) {
    if (c.cites.empty()) throw ConfigError("--lcc needs --cites");
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < ids.size(); ++k) index[ids[k]] = k;
    std::vector<std::size_t> parent(ids.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t v) {
      while (parent[v] != v) v = parent[v] = parent[parent[v]];
      return v;
    };
    std::ifstream cin_(c.cites);
    if (!cin_) throw IoError("cannot open " + c.cites);
    std::string a, b;
    while (cin_ >> a >> b) {
      auto ia = index.find(a), ib = index.find(b);
      if (ia == index.end() || ib == index.end()) continue;
      parent[find(ia->second)] = find(ib->second);
    }
    std::map<std::size_t, std::size_t> sizes;
    for (std::size_t v = 0; v < ids.size(); ++v) ++sizes[find(v)];
    const auto best = std::max_element(sizes.begin(), sizes.end(), [](auto& x, auto& y) {
                        return x.second < y.second || (x.second == y.second && x.first > y.first);
                      })->first;
    keep.clear();
    for (std::size_t v = 0; v < ids.size(); ++v)
      if (find(v) == best) keep.push_back(v);
  }

  std::set<std::string> label_set(raw_labels.begin(), raw_labels.end());
  std::map<std::string, int> label_index;
  for (const auto& l : label_set) label_index.emplace(l, static_cast<int>(label_index.size()));

  Matrix x(keep.size(), rows.front().size());
  std::vector<int> labels;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    std::copy(rows[keep[k]].begin(), rows[keep[k]].end(), x.row(k).begin());
    labels.push_back(label_index.at(raw_labels[keep[k]]));
  }
  FeatureMatrix fx(std::move(x));
  const FeatureMode mode = fx.is_binary() ? FeatureMode::discrete : FeatureMode::continuous;
  return io::Dataset{c.name, std::move(fx), std::move(labels), label_index.size(), mode,
                     c.lcc ? "raw features, largest connected component" : "raw features"};
}

io::Dataset convert_container(const ConvertOptions& c) {
  if (c.features.empty() || c.features.size() > 2) throw ConfigError("give one or two --features files");
  std::vector<Matrix> blocks;
  for (const auto& f : c.features) blocks.push_back(io::read_matrix(f));
  std::size_t cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != blocks.front().rows()) throw ShapeError("feature blocks differ in row count");
    cols += b.cols();
  }
  Matrix x(blocks.front().rows(), cols);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      std::copy(b.row(i).begin(), b.row(i).end(), x.row(i).begin() + static_cast<std::ptrdiff_t>(off));
    off += b.cols();
  }
  auto labels = io::read_labels(c.labels);
  if (labels.size() != x.rows()) throw ShapeError("label count differs from feature rows");
  const std::size_t n_classes = static_cast<std::size_t>(*std::max_element(labels.begin(), labels.end())) + 1;
  FeatureMatrix fx(std::move(x));
  const FeatureMode mode = parse_feature_mode(c.mode);
  if (mode == FeatureMode::discrete && !fx.is_binary()) throw NonBinaryValue("discrete mode needs binary features");
  return io::Dataset{c.name, std::move(fx), std::move(labels), n_classes, mode,
                     blocks.size() == 2 ? "two feature blocks concatenated column-wise" : "as distributed"};
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InvalidParameter*>(&e) ||
      dynamic_cast<const ModeMismatch*>(&e))
    return 1;
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Momentum-gradient feature poisoning attacks on hypergraph neural networks"};
  app.require_subcommand(1);
  Options o;

  // convert
  ConvertOptions conv;
  auto* convert = app.add_subcommand("convert", "Convert a public dataset into the container format");
  convert->add_option("--format", conv.format, "linqs|container")->capture_default_str();
  convert->add_option("--content", conv.content, "LINQS .content file");
  convert->add_option("--cites", conv.cites, "LINQS .cites file");
  convert->add_flag("--lcc", conv.lcc, "Keep only the largest connected component of the citation graph");
  convert->add_option("--features", conv.features, "Feature container file(s), concatenated column-wise");
  convert->add_option("--labels", conv.labels, "Label file, one integer per line");
  convert->add_option("--mode", conv.mode, "discrete|continuous (container format)")->capture_default_str();
  convert->add_option("--name", conv.name, "Dataset name")->capture_default_str();
  convert->add_option("--out", conv.out, "Output directory")->required();

  // synth
  std::string synth_kind = "bow";
  synthetic::BagOfWordsSpec bow;
  synthetic::BlobSpec blob;
  std::size_t synth_nodes = 300, synth_features = 0, synth_classes = 0;
  std::uint64_t synth_seed = 1;
  std::string synth_name, synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--kind", synth_kind, "bow (binary bag-of-words) | blobs (continuous)")->capture_default_str();
  synth->add_option("--nodes", synth_nodes)->capture_default_str();
  synth->add_option("--features", synth_features, "Feature count (kind default if omitted)");
  synth->add_option("--classes", synth_classes, "Class count (kind default if omitted)");
  synth->add_option("--seed", synth_seed)->capture_default_str();
  synth->add_option("--name", synth_name);
  synth->add_option("--out", synth_out, "Output directory")->required();

  auto* train_cmd = app.add_subcommand("train", "Train on clean features and report accuracy");
  add_dataset(train_cmd, o);
  add_construction(train_cmd, o);
  add_training(train_cmd, o);
  std::string checkpoint;
  train_cmd->add_option("--checkpoint", checkpoint, "Write the trained parameters here");

  auto* attack_cmd = app.add_subcommand("attack", "Poison a dataset and write the perturbed copy plus the log");
  add_dataset(attack_cmd, o);
  add_construction(attack_cmd, o);
  add_attack(attack_cmd, o);
  add_training(attack_cmd, o);
  attack_cmd->add_option("--out", o.out, "Output directory")->required();

  auto* eval_cmd = app.add_subcommand("eval", "Train a victim on the given features and print test accuracy");
  add_dataset(eval_cmd, o);
  add_construction(eval_cmd, o);
  add_training(eval_cmd, o);
  std::string attack_result;
  eval_cmd->add_option("--attack-result", attack_result, "Use the perturbed matrix stored in this attack result");

  auto* run_cmd = app.add_subcommand("run", "Full poisoning protocol over several repeats");
  add_experiment(run_cmd, o);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the protocol for each value of one parameter");
  add_experiment(sweep_cmd, o);
  std::string axis, values;
  sweep_cmd->add_option("--axis", axis, "lambda|K|eps|mu")->required();
  sweep_cmd->add_option("--values", values, "Comma-separated values")->required();

  auto* transfer_cmd = app.add_subcommand("transfer", "Surrogate x victim construction matrix");
  add_experiment(transfer_cmd, o);
  std::string surrogates = "knn:10,eps:0.5", victims = "knn:10,eps:0.5";
  transfer_cmd->add_option("--surrogates", surrogates)->capture_default_str();
  transfer_cmd->add_option("--victims", victims)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*convert) {
      io::Dataset ds;
      if (conv.format == "linqs") {
        if (conv.content.empty()) throw ConfigError("--content is required for the linqs format");
        ds = convert_linqs(conv);
      } else if (conv.format == "container") {
        ds = convert_container(conv);
      } else {
        throw ConfigError("unknown --format '" + conv.format + "'");
      }
      const auto manifest = io::save_dataset(ds, conv.out);
      std::cout << json{{"manifest", manifest.string()},
                        {"n_nodes", ds.features.n_nodes()},
                        {"n_features", ds.features.n_features()},
                        {"n_classes", ds.n_classes},
                        {"feature_mode", to_string(ds.mode)}}
                       .dump()
                << "\n";
    } else if (*synth) {
      io::Dataset ds;
      if (synth_kind == "bow") {
        bow.n_nodes = synth_nodes;
        if (synth_features) bow.n_features = synth_features;
        if (synth_classes) bow.n_classes = synth_classes;
        bow.seed = synth_seed;
        ds = synthetic::bag_of_words(bow, synth_name.empty() ? "synthetic-bow" : synth_name);
      } else if (synth_kind == "blobs") {
        blob.n_nodes = synth_nodes;
        if (synth_features) blob.n_features = synth_features;
        if (synth_classes) blob.n_classes = synth_classes;
        blob.seed = synth_seed;
        ds = synthetic::blobs(blob, synth_name.empty() ? "synthetic-blobs" : synth_name);
      } else {
        throw ConfigError("--kind must be bow or blobs");
      }
      std::cout << io::save_dataset(ds, synth_out).string() << "\n";
    } else if (*train_cmd) {
      const auto ds = io::load_dataset(o.dataset);
      const auto seeds = experiment::SeedPlan::from(o.seed);
      const LabelData labels = experiment::split_labels(ds, split_spec(o), seeds.split);
      TrainConfig tc = train_config(o);
      tc.seed = seeds.victim;
      const auto op = normalized_operator(build_hypergraph(ds.features, Construction::parse(o.construction)));
      std::vector<double> trace;
      const ModelParams p = train(op, ds.features, labels, tc, &trace);
      const auto preds = predict(forward(op, ds.features, p));
      if (!checkpoint.empty()) io::save_checkpoint(p, checkpoint);
      std::cout << json{{"train_accuracy", accuracy(preds, labels, Split::train)},
                        {"test_accuracy", accuracy(preds, labels, Split::test)},
                        {"final_loss", trace.empty() ? 0.0 : trace.back()}}
                       .dump()
                << "\n";
    } else if (*attack_cmd) {
      const auto ds = io::load_dataset(o.dataset);
      const auto seeds = experiment::SeedPlan::from(o.seed);
      const LabelData labels = experiment::split_labels(ds, split_spec(o), seeds.split);
      const AttackKind kind = parse_attack_kind(o.attack);
      AttackConfig ac = attack_config(o);
      ac.mode = ds.mode;
      ac.seed = seeds.attack;
      ac.validate(ds.features.n_nodes());
      const Construction c = Construction::parse(o.construction);
      auto make_surrogate = [&]() -> Surrogate {
        if (kind == AttackKind::random || kind == AttackKind::nda || kind == AttackKind::none) {
          Hypergraph g = build_hypergraph(ds.features, c);
          NormalizedOperator op = normalized_operator(g);
          return Surrogate{std::move(g), std::move(op), {}};
        }
        return experiment::train_surrogate(ds.features, labels, c, train_config(o), seeds.surrogate);
      };
      const Surrogate s = make_surrogate();
      const AttackResult r = run_attack(kind, ds.features, labels, s, ac);
      io::Dataset poisoned = ds;
      poisoned.name = ds.name + "-" + to_string(kind);
      poisoned.features = r.perturbed;
      const auto manifest = io::save_dataset(poisoned, o.out);
      const json meta{{"dataset", o.dataset}, {"construction", c.to_string()}, {"attack", to_string(kind)},
                      {"lambda", o.lambda},   {"mu", o.mu},                    {"eta", o.eta},
                      {"sign", o.sign},       {"seed", o.seed}};
      io::save_attack_result(r, fs::path(o.out) / "attack_result.txt", meta);
      std::cout << json{{"manifest", manifest.string()},
                        {"budget", r.budget},
                        {"modifications_used", r.modifications_used},
                        {"exhausted", r.exhausted}}
                       .dump()
                << "\n";
      if (r.exhausted) std::cerr << "warning: eligible cells ran out before the budget was spent\n";
    } else if (*eval_cmd) {
      const auto ds = io::load_dataset(o.dataset);
      const auto seeds = experiment::SeedPlan::from(o.seed);
      const LabelData labels = experiment::split_labels(ds, split_spec(o), seeds.split);
      FeatureMatrix x = ds.features;
      if (!attack_result.empty()) {
        x = io::load_attack_result(attack_result).result.perturbed;
        if (x.n_nodes() != ds.features.n_nodes()) throw ShapeError("attack result does not match the dataset");
      }
      const double acc =
          experiment::victim_accuracy(x, labels, Construction::parse(o.construction), train_config(o), seeds.victim);
      std::cout << json{{"test_accuracy", acc}}.dump() << "\n";
    } else if (*run_cmd) {
      const auto cfg = experiment_config(o);
      const auto rep = experiment::run_experiment(cfg);
      emit(o.out, rep.to_jsonl());
      std::cerr << rep.aggregate.to_json().dump() << "\n";
      if (rep.aggregate.n_ok == 0) return 2;
    } else if (*sweep_cmd) {
      const auto cfg = experiment_config(o);
      const auto ax = experiment::parse_sweep_axis(axis);
      const auto vals = parse_values(values);
      const auto reps = experiment::sweep(cfg, ax, vals);
      emit(o.out, experiment::sweep_to_jsonl(ax, vals, reps));
      if (std::all_of(reps.begin(), reps.end(), [](const auto& r) { return r.aggregate.n_ok == 0; })) return 2;
    } else if (*transfer_cmd) {
      const auto cfg = experiment_config(o);
      const auto s = parse_constructions(surrogates);
      const auto v = parse_constructions(victims);
      const auto reps = experiment::transfer_matrix(cfg, s, v);
      emit(o.out, experiment::transfer_to_jsonl(s, v, reps));
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 0;
}
