#include "zscat/zeroshot_inference.h"

#include <algorithm>
#include <stdexcept>

#include "zscat/errors.h"

namespace zscat {
namespace {

SentenceMatrix embed_sentence(const EmbeddingStore& store,
                              std::string_view sentence,
                              std::size_t target_length) {
  return embed_sequence(store, normalize_length(tokenize(sentence), target_length));
}

std::set<std::string> as_set(const std::vector<std::string>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

void CategoryTree::add_class(std::string name, std::vector<std::string> tags) {
  if (name.empty()) throw std::invalid_argument("class name must not be empty");
  if (tags.empty()) throw std::invalid_argument("class \"" + name + "\" has no tags");
  if (contains(name)) throw std::invalid_argument("duplicate class \"" + name + "\"");
  classes_.push_back({std::move(name), std::move(tags)});
}

bool CategoryTree::contains(std::string_view name) const {
  return std::any_of(classes_.begin(), classes_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

std::vector<std::string> CategoryTree::class_names() const {
  std::vector<std::string> names;
  for (const auto& e : classes_) names.push_back(e.name);
  return names;
}

double relatedness(const RelatednessModel& model, const EmbeddingSpaces& spaces,
                   std::string_view sentence, std::string_view tag,
                   std::size_t target_length) {
  const SentenceMatrix s = embed_sentence(spaces.sentence, sentence, target_length);
  return predict(model, s, embed_tag(spaces.tag, tag));
}

ClassScores class_scores(const RelatednessModel& model,
                         const EmbeddingSpaces& spaces, std::string_view sentence,
                         const CategoryTree& tree, std::size_t target_length) {
  const SentenceMatrix s = embed_sentence(spaces.sentence, sentence, target_length);
  ClassScores scores;
  scores.reserve(tree.size());
  for (const auto& entry : tree.classes()) {
    double sum = 0.0;
    std::size_t used = 0;
    std::set<std::string_view> seen;
    for (const auto& tag : entry.tags) {
      if (!seen.insert(tag).second) continue;
      TagEmbedding te;
      try {
        te = embed_tag(spaces.tag, tag);
      } catch (const AllWordsOutOfVocabulary&) {
        continue;
      }
      sum += predict(model, s, te);
      ++used;
    }
    ClassScore cs{entry.name, 0.0, used == 0};
    if (used > 0) cs.score = sum / static_cast<double>(used);
    scores.push_back(std::move(cs));
  }
  return scores;
}

std::vector<std::string> classify_multilabel(const ClassScores& scores,
                                             double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must lie in [0, 1]");
  }
  std::vector<std::string> out;
  for (const auto& s : scores) {
    if (s.score > threshold) out.push_back(s.name);
  }
  return out;
}

std::string classify_single(const ClassScores& scores) {
  if (scores.empty()) throw std::invalid_argument("no class scores");
  const ClassScore* best = &scores.front();
  for (const auto& s : scores) {
    if (s.score > best->score) best = &s;
  }
  return best->name;
}

double ClassCounts::precision() const {
  const std::size_t predicted = true_positives + false_positives;
  return predicted == 0 ? 0.0
                        : static_cast<double>(true_positives) / static_cast<double>(predicted);
}

double ClassCounts::recall() const {
  const std::size_t actual = true_positives + false_negatives;
  return actual == 0 ? 0.0
                     : static_cast<double>(true_positives) / static_cast<double>(actual);
}

EvaluationReport evaluate_scores(const std::vector<ClassScores>& scores,
                                 const LabeledDataset& dataset,
                                 const CategoryTree& tree, EvalMode mode,
                                 double threshold) {
  if (dataset.items.empty()) throw EmptyEvaluationSet();
  if (scores.size() != dataset.items.size()) {
    throw std::invalid_argument("one score set per dataset item is required");
  }
  for (const auto& item : dataset.items) {
    if (!tree.contains(item.label)) throw UnknownLabel(item.label);
  }

  EvaluationReport report;
  report.mode = mode;
  report.threshold = threshold;
  report.count = dataset.items.size();
  for (const auto& name : tree.class_names()) report.per_class.push_back({name, {}});
  auto counts = [&](const std::string& name) -> ClassCounts& {
    for (auto& [n, c] : report.per_class) {
      if (n == name) return c;
    }
    throw UnknownLabel(name);
  };

  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    const std::string& gold = dataset.items[i].label;
    if (mode == EvalMode::kSingle) {
      const std::string predicted = classify_single(scores[i]);
      ++report.confusion[gold][predicted];
      if (predicted == gold) {
        ++report.correct;
        ++counts(gold).true_positives;
      } else {
        ++counts(gold).false_negatives;
        ++counts(predicted).false_positives;
      }
    } else {
      const auto predicted = as_set(classify_multilabel(scores[i], threshold));
      if (predicted == std::set<std::string>{gold}) ++report.correct;
      if (predicted.contains(gold)) {
        ++counts(gold).true_positives;
      } else {
        ++counts(gold).false_negatives;
      }
      for (const auto& p : predicted) {
        if (p != gold) ++counts(p).false_positives;
      }
    }
  }
  report.accuracy =
      static_cast<double>(report.correct) / static_cast<double>(report.count);
  return report;
}

EvaluationReport evaluate_dataset(const RelatednessModel& model,
                                  const EmbeddingSpaces& spaces,
                                  const LabeledDataset& dataset,
                                  const CategoryTree& tree, EvalMode mode,
                                  double threshold, std::size_t target_length) {
  if (dataset.items.empty()) throw EmptyEvaluationSet();
  for (const auto& item : dataset.items) {
    if (!tree.contains(item.label)) throw UnknownLabel(item.label);
  }
  std::vector<ClassScores> scores;
  scores.reserve(dataset.items.size());
  for (const auto& item : dataset.items) {
    scores.push_back(class_scores(model, spaces, item.sentence, tree, target_length));
  }
  return evaluate_scores(scores, dataset, tree, mode, threshold);
}

}  // namespace zscat
