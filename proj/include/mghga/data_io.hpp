#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mghga/attack.hpp"
#include "mghga/hgnn.hpp"
#include "mghga/hypergraph.hpp"

// On-disk formats.
//
// Matrix container: a header line `rows cols dtype` (dtype is `float64` or
// `binary`) followed by one line per row of space-separated values. Doubles are
// written in shortest round-trip form, so save/load is bit-exact.
//
// Labels: one integer per line.
//
// Dataset directory: manifest.json plus the files it names (paths relative to
// the manifest).
namespace mghga::io {

namespace fs = std::filesystem;

enum class Dtype { float64, binary };

struct DatasetManifest {
  std::string name;
  std::vector<std::string> feature_files;  // 1 or 2, concatenated column-wise
  std::string label_file;
  FeatureMode feature_mode = FeatureMode::discrete;
  std::size_t n_nodes = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::string preprocessing = "none";

  nlohmann::json to_json() const;
  static DatasetManifest from_json(const nlohmann::json& j);
};

struct Dataset {
  std::string name;
  FeatureMatrix features;
  std::vector<int> labels;
  std::size_t n_classes = 0;
  FeatureMode mode = FeatureMode::discrete;
  std::string preprocessing = "none";
};

struct SplitSpec {
  double train_fraction = 0.2;
  double test_fraction = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SplitMasks {
  std::vector<std::uint8_t> train;
  std::vector<std::uint8_t> test;
};

// --- raw containers --------------------------------------------------------

Matrix read_matrix(const fs::path& path);
void write_matrix(const fs::path& path, const Matrix& m, Dtype dtype = Dtype::float64);
std::string format_matrix(const Matrix& m, Dtype dtype);
Matrix parse_matrix(std::string_view text, const std::string& origin = "<memory>");

std::vector<int> read_labels(const fs::path& path);
void write_labels(const fs::path& path, const std::vector<int>& labels);

// Writes to a sibling temporary file, then renames over the target.
void write_file_atomic(const fs::path& path, const std::string& contents);
std::string read_file(const fs::path& path);

// --- datasets --------------------------------------------------------------

DatasetManifest read_manifest(const fs::path& manifest_path);
// Errors: ShapeError for declared/actual mismatches, NonBinaryValue for a
// non-binary cell in discrete mode, ParseError for unparseable files, IoError
// for unreadable ones.
Dataset load_dataset(const fs::path& manifest_path);
// Writes manifest.json, features.txt and labels.txt into dir.
fs::path save_dataset(const Dataset& ds, const fs::path& dir);

// Seeded shuffle; the first floor(train * n) nodes train, the next
// floor(test * n) test.
SplitMasks make_split(std::size_t n_nodes, const SplitSpec& spec);
LabelData make_label_data(const Dataset& ds, const SplitMasks& masks);

// --- attack results and checkpoints ----------------------------------------

struct StoredAttack {
  AttackResult result;
  nlohmann::json metadata;
};

void save_attack_result(const AttackResult& result, const fs::path& path,
                        const nlohmann::json& metadata = nlohmann::json::object());
StoredAttack load_attack_result(const fs::path& path);

void save_checkpoint(const ModelParams& params, const fs::path& path);
ModelParams load_checkpoint(const fs::path& path);

}  // namespace mghga::io
