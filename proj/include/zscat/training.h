#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zscat/architectures.h"
#include "zscat/corpus.h"
#include "zscat/embedding_store.h"
#include "zscat/numeric_core.h"
#include "zscat/text_pipeline.h"

namespace zscat {

struct TrainingPair {
  std::size_t record = 0;  // index into the source corpus
  std::string tag;
  int label = 0;  // 1 related, 0 unrelated
};

// For every (sentence, own tag) emits that pair with label 1 followed by one
// label-0 pair whose tag is drawn uniformly from the vocabulary minus the
// sentence's own tags. Deterministic in `seed`. Throws DegenerateVocabulary if
// some record already carries every tag, std::invalid_argument if empty.
std::vector<TrainingPair> sample_pairs(const Corpus& corpus, std::uint64_t seed);

struct TrainConfig {
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 0;
  bool fine_tune_embeddings = false;
  std::size_t target_length = kDefaultTargetLength;
};

struct EpochMetrics {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double accuracy = 0.0;  // p >= 0.5 predicts related
};

struct TrainResult {
  std::vector<EpochMetrics> epochs;
  // Copy of the store with the sentence-side vectors that training updated;
  // only set when fine_tune_embeddings is on. Tags keep using the original.
  std::optional<EmbeddingStore> sentence_embeddings;
  std::size_t dropped_tags = 0;     // tags with no in-vocabulary word
  std::size_t dropped_records = 0;  // records left without any usable tag
};

// Minibatch BCE + Adam over freshly sampled pairs each epoch. Single
// threaded, so a fixed seed gives bit-identical parameters. Tags whose words
// are all out of vocabulary are removed from the corpus first. Throws
// ShapeMismatch if the store and model dimensions disagree and NonFiniteLoss
// if a batch loss is not finite.
TrainResult train(RelatednessModel& model, const EmbeddingStore& store,
                  const Corpus& corpus, const TrainConfig& config);

struct BinaryMetrics {
  double accuracy = 0.0;
  double loss = 0.0;  // mean BCE
  std::size_t count = 0;
};

// `sentence_store` defaults to `store`; pass a fine-tuned copy to embed
// sentences with it while tags stay in the pretrained space.
BinaryMetrics evaluate_binary(const RelatednessModel& model,
                              const EmbeddingStore& store, const Corpus& corpus,
                              std::span<const TrainingPair> pairs,
                              std::size_t target_length = kDefaultTargetLength,
                              const EmbeddingStore* sentence_store = nullptr);

// Removes tags that embed_tag cannot embed, then records left with no tag.
struct VocabularyFilter {
  Corpus corpus;
  std::size_t dropped_tags = 0;
  std::size_t dropped_records = 0;
};
VocabularyFilter restrict_to_vocabulary(const Corpus& corpus,
                                        const EmbeddingStore& store);

// Pairs whose tag never occurs in `training_corpus`.
std::vector<TrainingPair> unseen_tag_pairs(std::span<const TrainingPair> pairs,
                                           const Corpus& training_corpus);

}  // namespace zscat
