#pragma once

// Generated worlds with a known answer: every cluster owns a centroid in the
// embedding space, its tags sit on the centroid and its sentence words are
// noisy samples around it. A sentence is related exactly to the tags of its
// own cluster.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "zscat/corpus.h"
#include "zscat/embedding_store.h"
#include "zscat/zeroshot_inference.h"

namespace zscat::synthetic {

enum class CentroidLayout {
  kOrthogonal,  // Gram-Schmidt on Gaussian draws
  kGaussian,    // independent Gaussian directions
  kSigns,       // random ±1 per coordinate
  // Corners of a ±1 cube over ceil(log2(clusters)) latent axes, embedded
  // through a random orthonormal map. Neighbouring clusters share axes.
  kCubeCorners,
};

struct WorldConfig {
  CentroidLayout layout = CentroidLayout::kCubeCorners;
  std::size_t clusters = 8;
  std::size_t dim = 16;
  std::size_t words_per_cluster = 24;
  std::size_t tags_per_cluster = 2;
  double centroid_norm = 1.0;
  double word_noise = 0.2;   // per-component standard deviation
  double tag_jitter = 0.02;  // per-component standard deviation
  std::size_t min_sentence_words = 6;
  std::size_t max_sentence_words = 14;
  std::uint64_t seed = 1;
};

struct World {
  WorldConfig config;
  EmbeddingStore store;
  std::vector<Vector> centroids;  // norm centroid_norm
};

World make_world(const WorldConfig& config);

std::string word_name(std::size_t cluster, std::size_t index);
std::string tag_name(std::size_t cluster, std::size_t index);
std::string class_name(std::size_t cluster);

std::string make_sentence(const World& world, std::size_t cluster,
                          std::mt19937_64& rng);

struct LabeledCorpus {
  Corpus corpus;
  std::vector<std::size_t> clusters;  // cluster of each record
};

// `sentences` records spread round-robin over `clusters`, each tagged with
// all tags of its cluster.
LabeledCorpus make_corpus(const World& world, std::span<const std::size_t> clusters,
                          std::size_t sentences, std::uint64_t seed);

CategoryTree make_tree(const World& world, std::span<const std::size_t> clusters);

LabeledDataset make_dataset(const World& world,
                            std::span<const std::size_t> clusters,
                            std::size_t sentences, std::uint64_t seed);

std::vector<std::size_t> all_clusters(const World& world);

}  // namespace zscat::synthetic
