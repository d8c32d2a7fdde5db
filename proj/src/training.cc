#include "zscat/training.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "zscat/errors.h"

namespace zscat {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

// Flattened gradient accumulator with the same block layout as the model.
struct Accumulator {
  std::vector<Vector> blocks;

  explicit Accumulator(const ModelParams& shape) {
    for (const auto& b : parameter_blocks(shape)) blocks.emplace_back(b.values.size(), 0.0);
  }
  void add(const ModelParams& grads) {
    auto src = parameter_blocks(grads);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      for (std::size_t k = 0; k < blocks[i].size(); ++k) blocks[i][k] += src[i].values[k];
    }
  }
  void scale(double s) {
    for (auto& b : blocks) {
      for (double& x : b) x *= s;
    }
  }
  void clear() {
    for (auto& b : blocks) std::fill(b.begin(), b.end(), 0.0);
  }
};

// Tunable copy of the sentence-side vectors for the words the corpus uses.
struct TunedEmbeddings {
  EmbeddingStore store;
  std::vector<std::size_t> word_ids;                 // slot -> store id
  std::unordered_map<std::size_t, std::size_t> slot;  // store id -> slot
  Vector values;                                     // slot-major copy
  Vector grads;
  AdamState adam;
};

}  // namespace

std::vector<TrainingPair> sample_pairs(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) throw std::invalid_argument("cannot sample pairs from an empty corpus");
  const std::vector<std::string> vocab(corpus.tag_vocabulary().begin(),
                                       corpus.tag_vocabulary().end());
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < vocab.size(); ++i) index.emplace(vocab[i], i);

  std::mt19937_64 rng(seed);
  std::vector<TrainingPair> pairs;
  pairs.reserve(2 * corpus.positive_pair_count());
  std::vector<std::size_t> own;
  for (std::size_t r = 0; r < corpus.size(); ++r) {
    const CorpusRecord& rec = corpus.records()[r];
    if (rec.tags.size() >= vocab.size()) {
      throw DegenerateVocabulary("record " + std::to_string(r + 1) +
                                 " carries every tag of the vocabulary, so no "
                                 "unrelated tag can be sampled");
    }
    own.clear();
    for (const auto& tag : rec.tags) own.push_back(index.at(tag));
    std::sort(own.begin(), own.end());
    std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - own.size() - 1);
    for (const auto& tag : rec.tags) {
      pairs.push_back({r, tag, 1});
      // k-th vocabulary entry that is not one of the record's tags
      std::size_t k = pick(rng);
      for (std::size_t excluded : own) {
        if (excluded <= k) ++k;
      }
      pairs.push_back({r, vocab[k], 0});
    }
  }
  return pairs;
}

VocabularyFilter restrict_to_vocabulary(const Corpus& corpus,
                                        const EmbeddingStore& store) {
  VocabularyFilter out;
  std::map<std::string, bool> usable;
  for (const auto& tag : corpus.tag_vocabulary()) {
    bool ok = false;
    for (const auto& word : tokenize(tag)) ok = ok || store.contains(word);
    usable.emplace(tag, ok);
    if (!ok) ++out.dropped_tags;
  }
  for (const auto& rec : corpus.records()) {
    std::vector<std::string> tags;
    for (const auto& tag : rec.tags) {
      if (usable.at(tag)) tags.push_back(tag);
    }
    if (tags.empty() || rec.tokens.empty()) {
      ++out.dropped_records;
      continue;
    }
    out.corpus.add(rec.text, rec.tokens, std::move(tags));
  }
  return out;
}

TrainResult train(RelatednessModel& model, const EmbeddingStore& store,
                  const Corpus& corpus, const TrainConfig& config) {
  if (store.dim() != model.embed_dim()) {
    throw ShapeMismatch("embedding store has dimension " + std::to_string(store.dim()) +
                        ", model expects " + std::to_string(model.embed_dim()));
  }
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be >= 1");

  TrainResult result;
  if (config.epochs == 0) return result;

  VocabularyFilter filtered = restrict_to_vocabulary(corpus, store);
  result.dropped_tags = filtered.dropped_tags;
  result.dropped_records = filtered.dropped_records;
  const Corpus& data = filtered.corpus;
  if (data.empty()) throw Error("no trainable records left in the corpus");

  std::map<std::string, TagEmbedding> tags;
  for (const auto& tag : data.tag_vocabulary()) tags.emplace(tag, embed_tag(store, tag));

  std::vector<TokenSequence> sequences;
  sequences.reserve(data.size());
  for (const auto& rec : data.records()) {
    sequences.push_back(normalize_length(rec.tokens, config.target_length));
  }

  std::optional<TunedEmbeddings> tuned;
  std::vector<SentenceMatrix> fixed_sentences;
  if (config.fine_tune_embeddings) {
    tuned.emplace(TunedEmbeddings{store, {}, {}, {}, {}, {}});
    std::set<std::size_t> used;
    for (const auto& seq : sequences) {
      for (const auto& token : seq.tokens()) {
        if (auto id = store.find(token)) used.insert(*id);
      }
    }
    tuned->word_ids.assign(used.begin(), used.end());
    for (std::size_t s = 0; s < tuned->word_ids.size(); ++s) {
      tuned->slot.emplace(tuned->word_ids[s], s);
      const auto vec = store.vector(tuned->word_ids[s]);
      tuned->values.insert(tuned->values.end(), vec.begin(), vec.end());
    }
    tuned->grads.assign(tuned->values.size(), 0.0);
    tuned->adam = AdamState(tuned->values.size(), config.adam);
  } else {
    fixed_sentences.reserve(sequences.size());
    for (const auto& seq : sequences) fixed_sentences.push_back(embed_sequence(store, seq));
  }

  std::vector<AdamState> adam;
  for (const auto& b : parameter_blocks(model.params())) {
    adam.emplace_back(b.values.size(), config.adam);
  }
  Accumulator acc(model.params());
  const std::size_t dim = store.dim();

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<TrainingPair> pairs = sample_pairs(data, derive_seed(config.seed, epoch, 1));
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, epoch, 2));
    std::shuffle(pairs.begin(), pairs.end(), shuffle_rng);

    double loss_sum = 0.0;
    std::size_t correct = 0;
    for (std::size_t start = 0, batch = 0; start < pairs.size();
         start += config.batch_size, ++batch) {
      const std::size_t end = std::min(pairs.size(), start + config.batch_size);
      acc.clear();
      if (tuned) std::fill(tuned->grads.begin(), tuned->grads.end(), 0.0);
      double batch_loss = 0.0;

      for (std::size_t n = start; n < end; ++n) {
        const TrainingPair& pair = pairs[n];
        SentenceMatrix tuned_sentence;
        if (tuned) tuned_sentence = embed_sequence(tuned->store, sequences[pair.record]);
        const SentenceMatrix& sentence =
            tuned ? tuned_sentence : fixed_sentences[pair.record];

        ForwardResult fr = forward(model, sentence, tags.at(pair.tag));
        batch_loss += bce_loss(fr.probability, pair.label);
        if ((fr.probability >= 0.5) == (pair.label == 1)) ++correct;
        Gradients g = backward(model, fr.cache, pair.label);
        acc.add(g.params);
        if (tuned) {
          for (std::size_t t = 0; t < sentence.word_ids.size(); ++t) {
            if (!sentence.word_ids[t]) continue;
            const std::size_t slot = tuned->slot.at(*sentence.word_ids[t]);
            for (std::size_t k = 0; k < dim; ++k) {
              tuned->grads[slot * dim + k] += g.sentence(t, k);
            }
          }
        }
      }

      if (!std::isfinite(batch_loss)) throw NonFiniteLoss(epoch, batch);
      loss_sum += batch_loss;

      const double inv = 1.0 / static_cast<double>(end - start);
      acc.scale(inv);
      auto blocks = parameter_blocks(model.mutable_params());
      for (std::size_t i = 0; i < blocks.size(); ++i) {
        adam_update(adam[i], blocks[i].values, acc.blocks[i]);
      }
      if (tuned) {
        for (double& x : tuned->grads) x *= inv;
        adam_update(tuned->adam, tuned->values, tuned->grads);
        for (std::size_t s = 0; s < tuned->word_ids.size(); ++s) {
          auto row = tuned->store.mutable_vector(tuned->word_ids[s]);
          std::copy_n(tuned->values.begin() + static_cast<std::ptrdiff_t>(s * dim), dim,
                      row.begin());
        }
      }
    }

    const double count = static_cast<double>(pairs.size());
    result.epochs.push_back({epoch, loss_sum / count, static_cast<double>(correct) / count});
  }

  if (tuned) result.sentence_embeddings = std::move(tuned->store);
  return result;
}

BinaryMetrics evaluate_binary(const RelatednessModel& model,
                              const EmbeddingStore& store, const Corpus& corpus,
                              std::span<const TrainingPair> pairs,
                              std::size_t target_length,
                              const EmbeddingStore* sentence_store) {
  if (pairs.empty()) throw EmptyEvaluationSet();
  const EmbeddingStore& sentences = sentence_store ? *sentence_store : store;

  std::unordered_map<std::size_t, SentenceMatrix> matrices;
  std::map<std::string, TagEmbedding> tags;
  BinaryMetrics m;
  double loss = 0.0;
  std::size_t correct = 0;
  for (const TrainingPair& pair : pairs) {
    if (pair.record >= corpus.size()) {
      throw std::out_of_range("training pair refers to a record outside the corpus");
    }
    auto mit = matrices.find(pair.record);
    if (mit == matrices.end()) {
      const auto& rec = corpus.records()[pair.record];
      mit = matrices
                .emplace(pair.record,
                         embed_sequence(sentences, normalize_length(rec.tokens, target_length)))
                .first;
    }
    auto tit = tags.find(pair.tag);
    if (tit == tags.end()) tit = tags.emplace(pair.tag, embed_tag(store, pair.tag)).first;

    const double p = predict(model, mit->second, tit->second);
    loss += bce_loss(p, pair.label);
    if ((p >= 0.5) == (pair.label == 1)) ++correct;
  }
  m.count = pairs.size();
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.count);
  m.loss = loss / static_cast<double>(m.count);
  return m;
}

std::vector<TrainingPair> unseen_tag_pairs(std::span<const TrainingPair> pairs,
                                           const Corpus& training_corpus) {
  std::vector<TrainingPair> out;
  for (const auto& pair : pairs) {
    if (!training_corpus.tag_vocabulary().contains(pair.tag)) out.push_back(pair);
  }
  return out;
}

}  // namespace zscat
