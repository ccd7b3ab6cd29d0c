#pragma once

#include <cstddef>
#include <cstdint>

#include "mghga/data_io.hpp"

namespace mghga::synthetic {

// Bag-of-words documents: each class owns a random vocabulary slice; a
// document draws its words from its class slice with probability
// topic_strength, otherwise from the whole vocabulary. Binary features.
struct BagOfWordsSpec {
  std::size_t n_nodes = 300;
  std::size_t n_features = 200;
  std::size_t n_classes = 5;
  std::size_t min_words = 6;
  std::size_t max_words = 20;
  double topic_fraction = 0.15;  // share of the vocabulary owned by each class
  double topic_strength = 0.6;
  std::uint64_t seed = 1;
};

// Gaussian class blobs squashed into [0, 1]. Continuous features.
struct BlobSpec {
  std::size_t n_nodes = 300;
  std::size_t n_features = 32;
  std::size_t n_classes = 4;
  double center_spread = 0.35;
  double noise = 0.15;
  std::uint64_t seed = 1;
};

io::Dataset bag_of_words(const BagOfWordsSpec& spec, const std::string& name = "synthetic-bow");
io::Dataset blobs(const BlobSpec& spec, const std::string& name = "synthetic-blobs");

}  // namespace mghga::synthetic
