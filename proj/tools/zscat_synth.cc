// Writes a generated clustered world (embeddings, corpus, category tree and
// labeled dataset) into a directory, for demos and CLI tests.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "zscat/datasets.h"
#include "zscat/synthetic.h"

int main(int argc, char** argv) {
  zscat::synthetic::WorldConfig cfg;
  std::string out_dir = ".";
  std::size_t sentences = 200;
  std::size_t dataset_sentences = 80;
  CLI::App app{"Generate a synthetic zscat world"};
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--clusters", cfg.clusters);
  app.add_option("--dim", cfg.dim);
  app.add_option("--sentences", sentences, "Corpus records");
  app.add_option("--dataset-sentences", dataset_sentences, "Labeled dataset items");
  app.add_option("--seed", cfg.seed);
  CLI11_PARSE(app, argc, argv);

  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto world = zscat::synthetic::make_world(cfg);
  const auto clusters = zscat::synthetic::all_clusters(world);

  std::ofstream emb(fs::path(out_dir) / "embeddings.txt");
  zscat::write_embeddings_text(emb, world.store);
  std::ofstream corpus(fs::path(out_dir) / "corpus.tsv");
  zscat::write_corpus(corpus, zscat::synthetic::make_corpus(world, clusters, sentences,
                                                             cfg.seed + 1).corpus);
  std::ofstream tree(fs::path(out_dir) / "tree.txt");
  zscat::write_category_tree(tree, zscat::synthetic::make_tree(world, clusters));
  std::ofstream dataset(fs::path(out_dir) / "dataset.tsv");
  zscat::write_labeled_dataset_tsv(
      dataset, zscat::synthetic::make_dataset(world, clusters, dataset_sentences, cfg.seed + 2));
  std::cout << "wrote synthetic world to " << out_dir << '\n';
  return 0;
}
