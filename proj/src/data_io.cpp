#include "mghga/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "mghga/errors.hpp"
#include "mghga/rng.hpp"

namespace mghga::io {

using nlohmann::json;

namespace {

constexpr std::string_view kAttackMagic = "mghga-attack-result 1";
constexpr std::string_view kCheckpointMagic = "hgnn-checkpoint 1";

std::string dtype_name(Dtype d) { return d == Dtype::binary ? "binary" : "float64"; }

void append_double(std::string& out, double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, r.ptr);
}

// Whitespace tokenizer over an in-memory buffer that tracks line numbers for
// error messages.
class Tokens {
 public:
  Tokens(std::string_view text, std::string origin) : text_(text), origin_(std::move(origin)) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::string_view next(const char* what) {
    skip_space();
    if (pos_ >= text_.size()) fail(std::string("unexpected end of input, expected ") + what);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    return text_.substr(start, pos_ - start);
  }

  // Rest of the current line, trimmed of the newline.
  std::string_view line(const char* what) {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
    if (pos_ >= text_.size()) fail(std::string("unexpected end of input, expected ") + what);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    auto out = text_.substr(start, pos_ - start);
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    return out;
  }

  std::size_t next_size(const char* what) {
    auto tok = next(what);
    std::size_t v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      fail(std::string("expected non-negative integer for ") + what + ", got '" + std::string(tok) + "'");
    return v;
  }

  long next_long(const char* what) {
    auto tok = next(what);
    long v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      fail(std::string("expected integer for ") + what + ", got '" + std::string(tok) + "'");
    return v;
  }

  double next_double(const char* what) {
    auto tok = next(what);
    double v = 0;
    auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      fail(std::string("expected number for ") + what + ", got '" + std::string(tok) + "'");
    return v;
  }

  void expect(std::string_view word) {
    auto tok = next(std::string(word).c_str());
    if (tok != word) fail("expected '" + std::string(word) + "', got '" + std::string(tok) + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto line_no = 1 + std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos_), '\n');
    throw ParseError(origin_ + ":" + std::to_string(line_no) + ": " + msg);
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view text_;
  std::string origin_;
  std::size_t pos_ = 0;
};

Matrix parse_matrix_tokens(Tokens& t) {
  const std::size_t rows = t.next_size("row count");
  const std::size_t cols = t.next_size("column count");
  const auto dtype = t.next("dtype");
  if (dtype != "float64" && dtype != "binary") t.fail("unknown dtype '" + std::string(dtype) + "'");
  const bool binary = dtype == "binary";
  std::vector<double> data(rows * cols);
  for (double& v : data) {
    v = t.next_double("matrix value");
    if (binary && v != 0.0 && v != 1.0) t.fail("binary container holds a non-binary value");
  }
  return Matrix(rows, cols, std::move(data));
}

}  // namespace

// ---------------------------------------------------------------------------
// files
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed for " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string format_matrix(const Matrix& m, Dtype dtype) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " + dtype_name(dtype) + "\n";
  out.reserve(out.size() + m.size() * (dtype == Dtype::binary ? 2 : 12));
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out.push_back(' ');
      if (dtype == Dtype::binary) {
        if (r[j] != 0.0 && r[j] != 1.0) throw NonBinaryValue("binary container asked to store a non-binary value");
        out.push_back(r[j] == 1.0 ? '1' : '0');
      } else {
        append_double(out, r[j]);
      }
    }
    out.push_back('\n');
  }
  return out;
}

Matrix parse_matrix(std::string_view text, const std::string& origin) {
  Tokens t(text, origin);
  Matrix m = parse_matrix_tokens(t);
  if (!t.at_end()) t.fail("trailing data after matrix");
  return m;
}

Matrix read_matrix(const fs::path& path) { return parse_matrix(read_file(path), path.string()); }

void write_matrix(const fs::path& path, const Matrix& m, Dtype dtype) {
  write_file_atomic(path, format_matrix(m, dtype));
}

std::vector<int> read_labels(const fs::path& path) {
  const std::string text = read_file(path);
  Tokens t(text, path.string());
  std::vector<int> labels;
  while (!t.at_end()) {
    const long v = t.next_long("label");
    if (v < 0 || v > std::numeric_limits<int>::max()) t.fail("label out of range");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<int>& labels) {
  std::string out;
  for (int l : labels) {
    out += std::to_string(l);
    out.push_back('\n');
  }
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// datasets
// ---------------------------------------------------------------------------

json DatasetManifest::to_json() const {
  return json{{"name", name},
              {"feature_files", feature_files},
              {"label_file", label_file},
              {"feature_mode", to_string(feature_mode)},
              {"n_nodes", n_nodes},
              {"n_features", n_features},
              {"n_classes", n_classes},
              {"preprocessing", preprocessing}};
}

DatasetManifest DatasetManifest::from_json(const json& j) {
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.feature_files = j.at("feature_files").get<std::vector<std::string>>();
    m.label_file = j.at("label_file").get<std::string>();
    m.feature_mode = parse_feature_mode(j.at("feature_mode").get<std::string>());
    m.n_nodes = j.at("n_nodes").get<std::size_t>();
    m.n_features = j.at("n_features").get<std::size_t>();
    m.n_classes = j.at("n_classes").get<std::size_t>();
    m.preprocessing = j.value("preprocessing", std::string("none"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("manifest: ") + e.what());
  }
  if (m.feature_files.empty() || m.feature_files.size() > 2)
    throw ParseError("manifest: expected one or two feature files");
  return m;
}

DatasetManifest read_manifest(const fs::path& manifest_path) {
  const std::string text = read_file(manifest_path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(manifest_path.string() + ": " + e.what());
  }
  return DatasetManifest::from_json(j);
}

Dataset load_dataset(const fs::path& manifest_path) {
  const DatasetManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();

  std::vector<Matrix> blocks;
  for (const auto& f : m.feature_files) blocks.push_back(read_matrix(base / f));
  std::size_t total_cols = 0;
  for (const auto& b : blocks) {
    if (b.rows() != m.n_nodes)
      throw ShapeError("feature file has " + std::to_string(b.rows()) + " rows, manifest declares " +
                       std::to_string(m.n_nodes));
    total_cols += b.cols();
  }
  if (total_cols != m.n_features)
    throw ShapeError("feature files have " + std::to_string(total_cols) + " columns, manifest declares " +
                     std::to_string(m.n_features));

  Matrix x(m.n_nodes, m.n_features);
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.rows(); ++i)
      std::copy(b.row(i).begin(), b.row(i).end(), x.row(i).begin() + static_cast<std::ptrdiff_t>(offset));
    offset += b.cols();
  }
  if (m.feature_mode == FeatureMode::discrete) {
    for (std::size_t i = 0; i < x.rows(); ++i)
      for (std::size_t j = 0; j < x.cols(); ++j)
        if (x(i, j) != 0.0 && x(i, j) != 1.0)
          throw NonBinaryValue("discrete dataset has value " + std::to_string(x(i, j)) + " at (" +
                               std::to_string(i) + ", " + std::to_string(j) + ")");
  }

  auto labels = read_labels(base / m.label_file);
  if (labels.size() != m.n_nodes)
    throw ShapeError("label file has " + std::to_string(labels.size()) + " entries, manifest declares " +
                     std::to_string(m.n_nodes));
  for (int l : labels)
    if (static_cast<std::size_t>(l) >= m.n_classes)
      throw ShapeError("label " + std::to_string(l) + " exceeds declared class count");

  Dataset ds{m.name, FeatureMatrix(std::move(x)), std::move(labels), m.n_classes, m.feature_mode, m.preprocessing};
  return ds;
}

fs::path save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  DatasetManifest m;
  m.name = ds.name;
  m.feature_files = {"features.txt"};
  m.label_file = "labels.txt";
  m.feature_mode = ds.mode;
  m.n_nodes = ds.features.n_nodes();
  m.n_features = ds.features.n_features();
  m.n_classes = ds.n_classes;
  m.preprocessing = ds.preprocessing;
  write_matrix(dir / "features.txt", ds.features.values(),
               ds.mode == FeatureMode::discrete ? Dtype::binary : Dtype::float64);
  write_labels(dir / "labels.txt", ds.labels);
  const fs::path manifest = dir / "manifest.json";
  write_file_atomic(manifest, m.to_json().dump(2) + "\n");
  return manifest;
}

void SplitSpec::validate() const {
  if (!(train_fraction > 0.0) || !(test_fraction > 0.0) || train_fraction + test_fraction > 1.0 + 1e-12)
    throw ConfigError("split fractions must be positive and sum to at most 1");
}

SplitMasks make_split(std::size_t n_nodes, const SplitSpec& spec) {
  spec.validate();
  if (n_nodes < 2) throw ConfigError("split needs at least two nodes");
  const auto n_train = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n_nodes)));
  const auto n_test = static_cast<std::size_t>(std::floor(spec.test_fraction * static_cast<double>(n_nodes)));
  if (n_train == 0 || n_test == 0 || n_train + n_test > n_nodes)
    throw ConfigError("split of " + std::to_string(n_nodes) + " nodes leaves an empty side");

  std::vector<std::size_t> order(n_nodes);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(spec.seed, Stream::split);
  std::shuffle(order.begin(), order.end(), rng);

  SplitMasks masks{std::vector<std::uint8_t>(n_nodes, 0), std::vector<std::uint8_t>(n_nodes, 0)};
  for (std::size_t k = 0; k < n_train; ++k) masks.train[order[k]] = 1;
  for (std::size_t k = n_train; k < n_train + n_test; ++k) masks.test[order[k]] = 1;
  return masks;
}

LabelData make_label_data(const Dataset& ds, const SplitMasks& masks) {
  LabelData l{ds.labels, masks.train, masks.test, ds.n_classes};
  l.validate();
  return l;
}

// ---------------------------------------------------------------------------
// attack results
// ---------------------------------------------------------------------------

void save_attack_result(const AttackResult& result, const fs::path& path, const json& metadata) {
  json meta = metadata;
  meta["budget"] = result.budget;
  meta["modifications_used"] = result.modifications_used;
  meta["exhausted"] = result.exhausted;

  std::string out(kAttackMagic);
  out += "\nmeta " + meta.dump() + "\n";
  out += "cells " + std::to_string(result.modified_cells.size()) + "\n";
  for (const auto& c : result.modified_cells) {
    out += std::to_string(c.node) + " " + std::to_string(c.feature) + " ";
    append_double(out, c.old_value);
    out.push_back(' ');
    append_double(out, c.new_value);
    out.push_back('\n');
  }
  out += "matrix\n";
  out += format_matrix(result.perturbed.values(), Dtype::float64);
  write_file_atomic(path, out);
}

StoredAttack load_attack_result(const fs::path& path) {
  const std::string text = read_file(path);
  Tokens t(text, path.string());
  if (t.line("header") != kAttackMagic) t.fail("not an attack result file (bad header)");
  t.expect("meta");
  StoredAttack s;
  try {
    s.metadata = json::parse(t.line("metadata"));
  } catch (const json::parse_error& e) {
    t.fail(std::string("bad metadata: ") + e.what());
  }
  t.expect("cells");
  const std::size_t n = t.next_size("cell count");
  for (std::size_t k = 0; k < n; ++k) {
    CellChange c;
    c.node = t.next_size("node");
    c.feature = t.next_size("feature");
    c.old_value = t.next_double("old value");
    c.new_value = t.next_double("new value");
    s.result.modified_cells.push_back(c);
  }
  t.expect("matrix");
  Matrix m = parse_matrix_tokens(t);
  if (!t.at_end()) t.fail("trailing data");
  for (const auto& c : s.result.modified_cells)
    if (c.node >= m.rows() || c.feature >= m.cols()) t.fail("modified cell outside the matrix");
  s.result.perturbed = FeatureMatrix(std::move(m));
  try {
    s.result.budget = s.metadata.at("budget").get<std::size_t>();
    s.result.modifications_used = s.metadata.at("modifications_used").get<std::size_t>();
    s.result.exhausted = s.metadata.at("exhausted").get<bool>();
  } catch (const json::exception& e) {
    t.fail(std::string("metadata incomplete: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// checkpoints
// ---------------------------------------------------------------------------

void save_checkpoint(const ModelParams& params, const fs::path& path) {
  std::string out(kCheckpointMagic);
  out += "\ntheta1\n" + format_matrix(params.theta1, Dtype::float64);
  out += "theta2\n" + format_matrix(params.theta2, Dtype::float64);
  write_file_atomic(path, out);
}

ModelParams load_checkpoint(const fs::path& path) {
  const std::string text = read_file(path);
  Tokens t(text, path.string());
  if (t.line("header") != kCheckpointMagic) t.fail("not a checkpoint file (bad header)");
  t.expect("theta1");
  ModelParams p;
  p.theta1 = parse_matrix_tokens(t);
  t.expect("theta2");
  p.theta2 = parse_matrix_tokens(t);
  if (!t.at_end()) t.fail("trailing data");
  try {
    p.validate();
  } catch (const Error& e) {
    t.fail(e.what());
  }
  return p;
}

}  // namespace mghga::io
