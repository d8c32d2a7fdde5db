#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zscat/architectures.h"
#include "zscat/embedding_store.h"
#include "zscat/text_pipeline.h"

namespace zscat {

// Class name -> representative tags, in insertion order.
class CategoryTree {
 public:
  struct Entry {
    std::string name;
    std::vector<std::string> tags;
  };

  // Throws std::invalid_argument on an empty name, an empty tag list or a
  // name that is already present.
  void add_class(std::string name, std::vector<std::string> tags);

  const std::vector<Entry>& classes() const { return classes_; }
  std::size_t size() const { return classes_.size(); }
  bool empty() const { return classes_.empty(); }
  bool contains(std::string_view name) const;
  std::vector<std::string> class_names() const;

 private:
  std::vector<Entry> classes_;
};

// Where sentence words and tag words are looked up. Usually the same store;
// after fine-tuning the sentence side is the tuned copy.
struct EmbeddingSpaces {
  const EmbeddingStore& sentence;
  const EmbeddingStore& tag;

  explicit EmbeddingSpaces(const EmbeddingStore& both)
      : sentence(both), tag(both) {}
  EmbeddingSpaces(const EmbeddingStore& sentence_store,
                  const EmbeddingStore& tag_store)
      : sentence(sentence_store), tag(tag_store) {}
};

struct ClassScore {
  std::string name;
  double score = 0.0;          // mean relatedness over the usable tags
  bool no_usable_tags = false;  // every tag was out of vocabulary; score is 0
};

using ClassScores = std::vector<ClassScore>;

// tokenize -> normalize_length -> embed -> forward.
double relatedness(const RelatednessModel& model, const EmbeddingSpaces& spaces,
                   std::string_view sentence, std::string_view tag,
                   std::size_t target_length = kDefaultTargetLength);

ClassScores class_scores(const RelatednessModel& model,
                         const EmbeddingSpaces& spaces,
                         std::string_view sentence, const CategoryTree& tree,
                         std::size_t target_length = kDefaultTargetLength);

inline constexpr double kDefaultThreshold = 0.5;

// Classes scoring strictly above `threshold`, in tree order.
std::vector<std::string> classify_multilabel(const ClassScores& scores,
                                             double threshold = kDefaultThreshold);

// Highest-scoring class; the earliest class wins ties.
std::string classify_single(const ClassScores& scores);

enum class EvalMode { kSingle, kMultilabel };

struct LabeledItem {
  std::string sentence;
  std::string label;
};

struct LabeledDataset {
  std::vector<LabeledItem> items;
};

struct ClassCounts {
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  double precision() const;
  double recall() const;
};

struct EvaluationReport {
  EvalMode mode = EvalMode::kSingle;
  double threshold = kDefaultThreshold;
  double accuracy = 0.0;
  std::size_t count = 0;
  std::size_t correct = 0;
  // Tree order. Multilabel mode counts every predicted class separately.
  std::vector<std::pair<std::string, ClassCounts>> per_class;
  // gold -> predicted -> count; single mode only.
  std::map<std::string, std::map<std::string, std::size_t>> confusion;
};

// Single mode: accuracy of classify_single against the gold label.
// Multilabel mode: exact match of classify_multilabel against {gold}.
// Throws UnknownLabel before scoring if some gold label is not a tree class.
EvaluationReport evaluate_dataset(const RelatednessModel& model,
                                  const EmbeddingSpaces& spaces,
                                  const LabeledDataset& dataset,
                                  const CategoryTree& tree, EvalMode mode,
                                  double threshold = kDefaultThreshold,
                                  std::size_t target_length = kDefaultTargetLength);

// Same aggregation over precomputed scores; evaluate_dataset delegates here.
EvaluationReport evaluate_scores(const std::vector<ClassScores>& scores,
                                 const LabeledDataset& dataset,
                                 const CategoryTree& tree, EvalMode mode,
                                 double threshold = kDefaultThreshold);

}  // namespace zscat
