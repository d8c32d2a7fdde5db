#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "zscat/numeric_core.h"
#include "zscat/text_pipeline.h"

namespace zscat {

enum class EmbeddingFormat { kText, kWord2VecBinary };

// What embed_sequence does with words missing from the table. Sentence
// matrices have a fixed shape, so kSkip is accepted but treated as kZero.
enum class OovPolicy { kZero, kSkip };

// One row per token of a TokenSequence.
struct SentenceMatrix {
  Tensor2 values;              // length x dim
  std::size_t oov_count = 0;   // rows that were filled with zeros
  std::vector<std::optional<std::size_t>> word_ids;  // table row per token
};

struct TagEmbedding {
  Vector values;
};

// Vocabulary -> dense vector table. Immutable once loaded apart from
// mutable_vector(), which fine-tuning uses on a private copy.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dim, OovPolicy policy = OovPolicy::kZero);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  OovPolicy oov_policy() const { return policy_; }
  void set_oov_policy(OovPolicy policy) { policy_ = policy; }

  // Returns false (and leaves the table alone) if `word` is already present.
  bool add(std::string word, std::span<const double> vector);

  std::optional<std::size_t> find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word).has_value(); }
  const std::string& word(std::size_t id) const { return words_[id]; }
  std::span<const double> vector(std::size_t id) const {
    return {data_.data() + id * dim_, dim_};
  }
  std::span<double> mutable_vector(std::size_t id) {
    return {data_.data() + id * dim_, dim_};
  }

 private:
  std::size_t dim_;
  OovPolicy policy_;
  std::vector<std::string> words_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Text: one "word v1 ... vd" line per entry; an optional leading "count dim"
// header line is recognised and skipped. Binary: word2vec layout, an ASCII
// "count dim" header line followed by `count` records of word, one space,
// then dim little-endian float32 values (an optional trailing newline per
// record is tolerated). Duplicate words keep their first vector.
EmbeddingStore load_embeddings(std::istream& in, EmbeddingFormat format);
EmbeddingStore load_embeddings_file(const std::string& path,
                                    std::optional<EmbeddingFormat> format = {});

void write_embeddings_text(std::ostream& out, const EmbeddingStore& store);
void write_embeddings_binary(std::ostream& out, const EmbeddingStore& store);

SentenceMatrix embed_sequence(const EmbeddingStore& store,
                              const TokenSequence& seq);

// Mean of the in-vocabulary word vectors of `tag`; out-of-vocabulary words are
// skipped. Throws AllWordsOutOfVocabulary when nothing is left.
TagEmbedding embed_tag(const EmbeddingStore& store, std::string_view tag);

}  // namespace zscat
