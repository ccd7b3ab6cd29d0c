#include "mghga/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mghga/errors.hpp"
#include "mghga/rng.hpp"

namespace mghga::synthetic {

io::Dataset bag_of_words(const BagOfWordsSpec& spec, const std::string& name) {
  if (spec.n_nodes < 2 || spec.n_features < 2 || spec.n_classes < 2)
    throw InvalidParameter("bag_of_words: need at least 2 nodes, features and classes");
  if (spec.min_words < 1 || spec.min_words > spec.max_words || spec.max_words > spec.n_features)
    throw InvalidParameter("bag_of_words: bad word-count range");
  Rng rng(derive_seed(spec.seed, 0xb0f));

  const auto slice = std::max<std::size_t>(
      1, static_cast<std::size_t>(spec.topic_fraction * static_cast<double>(spec.n_features)));
  std::vector<std::vector<std::size_t>> topics(spec.n_classes);
  std::vector<std::size_t> vocab(spec.n_features);
  std::iota(vocab.begin(), vocab.end(), std::size_t{0});
  for (auto& t : topics) {
    std::shuffle(vocab.begin(), vocab.end(), rng);
    t.assign(vocab.begin(), vocab.begin() + static_cast<std::ptrdiff_t>(slice));
  }

  Matrix x(spec.n_nodes, spec.n_features);
  std::vector<int> labels(spec.n_nodes);
  std::uniform_int_distribution<std::size_t> n_words(spec.min_words, spec.max_words);
  std::uniform_int_distribution<std::size_t> any_word(0, spec.n_features - 1);
  std::uniform_int_distribution<std::size_t> topic_word(0, slice - 1);
  std::bernoulli_distribution on_topic(spec.topic_strength);
  for (std::size_t i = 0; i < spec.n_nodes; ++i) {
    const auto c = i % spec.n_classes;
    labels[i] = static_cast<int>(c);
    const std::size_t words = n_words(rng);
    std::size_t placed = 0;
    while (placed < words) {
      const std::size_t w = on_topic(rng) ? topics[c][topic_word(rng)] : any_word(rng);
      if (x(i, w) == 0.0) {
        x(i, w) = 1.0;
        ++placed;
      }
    }
  }
  // Shuffle node order so classes are interleaved irregularly.
  std::vector<std::size_t> perm(spec.n_nodes);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix xs(spec.n_nodes, spec.n_features);
  std::vector<int> ls(spec.n_nodes);
  for (std::size_t k = 0; k < spec.n_nodes; ++k) {
    std::copy(x.row(perm[k]).begin(), x.row(perm[k]).end(), xs.row(k).begin());
    ls[k] = labels[perm[k]];
  }
  return io::Dataset{name, FeatureMatrix(std::move(xs)), std::move(ls), spec.n_classes, FeatureMode::discrete,
                     "synthetic"};
}

io::Dataset blobs(const BlobSpec& spec, const std::string& name) {
  if (spec.n_nodes < 2 || spec.n_features < 1 || spec.n_classes < 2)
    throw InvalidParameter("blobs: need at least 2 nodes, 1 feature and 2 classes");
  Rng rng(derive_seed(spec.seed, 0xb10b));
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix centers(spec.n_classes, spec.n_features);
  for (double& v : centers.values()) v = spec.center_spread * gauss(rng);

  Matrix x(spec.n_nodes, spec.n_features);
  std::vector<int> labels(spec.n_nodes);
  std::uniform_int_distribution<std::size_t> cls(0, spec.n_classes - 1);
  for (std::size_t i = 0; i < spec.n_nodes; ++i) {
    const std::size_t c = cls(rng);
    labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < spec.n_features; ++j) {
      const double z = centers(c, j) + spec.noise * gauss(rng);
      x(i, j) = 1.0 / (1.0 + std::exp(-z));
    }
  }
  return io::Dataset{name, FeatureMatrix(std::move(x)), std::move(labels), spec.n_classes, FeatureMode::continuous,
                     "synthetic"};
}

}  // namespace mghga::synthetic
