#include "zscat/synthetic.h"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace zscat::synthetic {
namespace {

Vector gaussian(std::size_t dim, double sd, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, sd);
  Vector v(dim);
  for (double& x : v) x = dist(rng);
  return v;
}

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

std::string numbered(const char* fmt, std::size_t a, std::size_t b) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

void orthonormalize(std::vector<Vector>& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const double proj = dot(vs[i], vs[j]);
      for (std::size_t k = 0; k < vs[i].size(); ++k) vs[i][k] -= proj * vs[j][k];
    }
    const double norm = std::sqrt(dot(vs[i], vs[i]));
    for (double& x : vs[i]) x /= norm;
  }
}

std::vector<Vector> cube_corner_centroids(const WorldConfig& config, std::mt19937_64& rng) {
  std::size_t axes = 1;
  while ((std::size_t{1} << axes) < config.clusters) ++axes;
  if (axes > config.dim) {
    throw std::invalid_argument("too many clusters for a latent code in this dimension");
  }
  std::vector<Vector> basis;
  for (std::size_t a = 0; a < axes; ++a) basis.push_back(gaussian(config.dim, 1.0, rng));
  orthonormalize(basis);
  std::vector<Vector> out;
  for (std::size_t m = 0; m < config.clusters; ++m) {
    Vector v(config.dim, 0.0);
    for (std::size_t a = 0; a < axes; ++a) {
      const double sign = (m >> a) & 1 ? -1.0 : 1.0;
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += sign * basis[a][k];
    }
    out.push_back(std::move(v));
  }
  return out;
}

}  // namespace

std::string word_name(std::size_t cluster, std::size_t index) {
  return numbered("c%zuw%02zu", cluster, index);
}

std::string tag_name(std::size_t cluster, std::size_t index) {
  return "topic" + std::to_string(cluster) + static_cast<char>('a' + index);
}

std::string class_name(std::size_t cluster) {
  return "class" + std::to_string(cluster);
}

World make_world(const WorldConfig& config) {
  if (config.clusters == 0 || config.dim == 0 || config.words_per_cluster == 0 ||
      config.tags_per_cluster == 0 || config.tags_per_cluster > 26 ||
      config.min_sentence_words == 0 ||
      config.min_sentence_words > config.max_sentence_words) {
    throw std::invalid_argument("invalid synthetic world configuration");
  }
  std::mt19937_64 rng(config.seed);
  World world{config, EmbeddingStore(config.dim), {}};

  std::vector<Vector> codes;
  if (config.layout == CentroidLayout::kCubeCorners) codes = cube_corner_centroids(config, rng);

  // Gram-Schmidt while there is room for orthogonal directions.
  for (std::size_t c = 0; c < config.clusters; ++c) {
    Vector v = codes.empty() ? gaussian(config.dim, 1.0, rng) : codes[c];
    if (config.layout == CentroidLayout::kSigns) {
      for (double& x : v) x = x < 0.0 ? -1.0 : 1.0;
    }
    if (config.layout == CentroidLayout::kOrthogonal && c < config.dim) {
      for (const auto& prev : world.centroids) {
        const double proj = dot(v, prev) / dot(prev, prev);
        for (std::size_t k = 0; k < v.size(); ++k) v[k] -= proj * prev[k];
      }
    }
    const double norm = std::sqrt(dot(v, v));
    for (double& x : v) x *= config.centroid_norm / norm;
    world.centroids.push_back(std::move(v));
  }

  for (std::size_t c = 0; c < config.clusters; ++c) {
    const Vector& mu = world.centroids[c];
    for (std::size_t t = 0; t < config.tags_per_cluster; ++t) {
      Vector v = gaussian(config.dim, config.tag_jitter, rng);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += mu[k];
      world.store.add(tag_name(c, t), v);
    }
    for (std::size_t w = 0; w < config.words_per_cluster; ++w) {
      Vector v = gaussian(config.dim, config.word_noise, rng);
      for (std::size_t k = 0; k < v.size(); ++k) v[k] += mu[k];
      world.store.add(word_name(c, w), v);
    }
  }
  return world;
}

std::string make_sentence(const World& world, std::size_t cluster,
                          std::mt19937_64& rng) {
  const WorldConfig& cfg = world.config;
  std::uniform_int_distribution<std::size_t> length(cfg.min_sentence_words,
                                                    cfg.max_sentence_words);
  std::uniform_int_distribution<std::size_t> word(0, cfg.words_per_cluster - 1);
  const std::size_t n = length(rng);
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s.push_back(' ');
    s += word_name(cluster, word(rng));
  }
  return s;
}

LabeledCorpus make_corpus(const World& world, std::span<const std::size_t> clusters,
                          std::size_t sentences, std::uint64_t seed) {
  if (clusters.empty()) throw std::invalid_argument("no clusters to sample from");
  std::mt19937_64 rng(seed);
  LabeledCorpus out;
  for (std::size_t i = 0; i < sentences; ++i) {
    const std::size_t c = clusters[i % clusters.size()];
    std::string text = make_sentence(world, c, rng);
    std::vector<std::string> tags;
    for (std::size_t t = 0; t < world.config.tags_per_cluster; ++t) {
      tags.push_back(tag_name(c, t));
    }
    out.corpus.add(text, tokenize(text), std::move(tags));
    out.clusters.push_back(c);
  }
  return out;
}

CategoryTree make_tree(const World& world, std::span<const std::size_t> clusters) {
  CategoryTree tree;
  for (std::size_t c : clusters) {
    std::vector<std::string> tags;
    for (std::size_t t = 0; t < world.config.tags_per_cluster; ++t) {
      tags.push_back(tag_name(c, t));
    }
    tree.add_class(class_name(c), std::move(tags));
  }
  return tree;
}

LabeledDataset make_dataset(const World& world,
                            std::span<const std::size_t> clusters,
                            std::size_t sentences, std::uint64_t seed) {
  if (clusters.empty()) throw std::invalid_argument("no clusters to sample from");
  std::mt19937_64 rng(seed);
  LabeledDataset out;
  for (std::size_t i = 0; i < sentences; ++i) {
    const std::size_t c = clusters[i % clusters.size()];
    out.items.push_back({make_sentence(world, c, rng), class_name(c)});
  }
  return out;
}

std::vector<std::size_t> all_clusters(const World& world) {
  std::vector<std::size_t> out(world.config.clusters);
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = c;
  return out;
}

}  // namespace zscat::synthetic
