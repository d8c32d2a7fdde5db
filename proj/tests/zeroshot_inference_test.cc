#include "zscat/zeroshot_inference.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.h"
#include "zscat/errors.h"
#include "zscat/synthetic.h"

namespace zscat {
namespace {

synthetic::World small_world() {
  synthetic::WorldConfig cfg;
  cfg.clusters = 4;
  cfg.dim = 6;
  cfg.words_per_cluster = 8;
  cfg.tags_per_cluster = 3;
  cfg.seed = 11;
  return synthetic::make_world(cfg);
}

ClassScores scores_of(std::initializer_list<std::pair<const char*, double>> list) {
  ClassScores out;
  for (const auto& [name, s] : list) out.push_back({name, s, false});
  return out;
}

TEST(CategoryTreeTest, RejectsBadClasses) {
  CategoryTree tree;
  tree.add_class("a", {"x"});
  EXPECT_THROW(tree.add_class("a", {"y"}), std::invalid_argument);
  EXPECT_THROW(tree.add_class("b", {}), std::invalid_argument);
  EXPECT_THROW(tree.add_class("", {"y"}), std::invalid_argument);
  EXPECT_TRUE(tree.contains("a"));
  EXPECT_FALSE(tree.contains("b"));
}

TEST(ClassScoresTest, ZeroModelScoresHalfEverywhere) {
  const auto world = small_world();
  const auto all = synthetic::all_clusters(world);
  const CategoryTree tree = synthetic::make_tree(world, all);
  for (Architecture arch : {Architecture::kMeanPool, Architecture::kLstmConcat,
                            Architecture::kTagConditionedLstm}) {
    const auto model = RelatednessModel::zeros(arch, 6, 4);
    const auto scores = class_scores(model, EmbeddingSpaces(world.store),
                                     "c0w01 c1w02 c2w03", tree);
    ASSERT_EQ(scores.size(), tree.size());
    for (const auto& s : scores) {
      EXPECT_EQ(s.score, 0.5);
      EXPECT_FALSE(s.no_usable_tags);
    }
  }
}

// Known per-tag outputs: d = 1 and the classifier reads only the tag value.
TEST(ClassScoresTest, MeanOfTagRelatedness) {
  EmbeddingStore store(1);
  const double hi = std::log(0.8 / 0.2);
  const double lo = std::log(0.6 / 0.4);
  store.add("word", std::vector<double>{0.0});
  store.add("hi", std::vector<double>{hi});
  store.add("lo", std::vector<double>{lo});
  auto model = RelatednessModel::zeros(Architecture::kMeanPool, 1, 0);
  model.mutable_params().classifier_w.data = {0.0, 1.0};
  CategoryTree tree;
  tree.add_class("c", {"hi", "lo"});
  const auto scores = class_scores(model, EmbeddingSpaces(store), "word", tree);
  ASSERT_EQ(scores.size(), 1u);
  EXPECT_NEAR(scores[0].score, 0.7, 1e-12);
}

TEST(ClassScoresTest, DuplicateTagsDoNotChangeTheScore) {
  const auto world = small_world();
  const auto model = RelatednessModel::create(Architecture::kLstmConcat, 6, 4, 3);
  const EmbeddingSpaces spaces(world.store);
  CategoryTree once;
  once.add_class("c", {"topic0a", "topic1a"});
  CategoryTree twice;
  twice.add_class("c", {"topic0a", "topic1a", "topic1a"});
  const std::string sentence = "c0w00 c0w03 c1w04";
  EXPECT_EQ(class_scores(model, spaces, sentence, once)[0].score,
            class_scores(model, spaces, sentence, twice)[0].score);
}

TEST(ClassScoresTest, OutOfVocabularyClassIsFlagged) {
  const auto world = small_world();
  const auto model = RelatednessModel::create(Architecture::kMeanPool, 6, 0, 3);
  CategoryTree tree;
  tree.add_class("known", {"topic0a"});
  tree.add_class("unknown", {"qwzx", "zzyzx"});
  tree.add_class("partial", {"qwzx", "topic1a"});
  const EmbeddingSpaces spaces(world.store);
  const auto scores = class_scores(model, spaces, "c0w00", tree);
  EXPECT_FALSE(scores[0].no_usable_tags);
  EXPECT_TRUE(scores[1].no_usable_tags);
  EXPECT_EQ(scores[1].score, 0.0);
  EXPECT_FALSE(scores[2].no_usable_tags);
  EXPECT_EQ(scores[2].score, relatedness(model, spaces, "c0w00", "topic1a"));
}

TEST(ClassScoresTest, EmptySentence) {
  const auto world = small_world();
  const auto model = RelatednessModel::create(Architecture::kMeanPool, 6, 0, 3);
  CategoryTree tree;
  tree.add_class("known", {"topic0a"});
  EXPECT_THROW(class_scores(model, EmbeddingSpaces(world.store), " ,. ", tree),
               EmptySentence);
}

TEST(ClassScoresTest, MatchesBruteForceOnRandomInstances) {
  const auto world = small_world();
  const EmbeddingSpaces spaces(world.store);
  std::mt19937_64 rng(5);
  for (int instance = 0; instance < 20; ++instance) {
    const auto arch = architecture_from_id(1 + instance % 3);
    const auto model = RelatednessModel::create(arch, 6, 4, instance);
    std::string sentence;
    for (int w = 0; w < 3 + instance % 5; ++w) {
      sentence += synthetic::word_name(rng() % 4, rng() % 8) + " ";
    }
    CategoryTree tree;
    for (int c = 0; c < 3; ++c) {
      std::vector<std::string> tags;
      for (int t = 0; t <= c; ++t) tags.push_back(synthetic::tag_name(rng() % 4, rng() % 3));
      tree.add_class("class" + std::to_string(c), tags);
    }
    const auto scores = class_scores(model, spaces, sentence, tree);
    for (std::size_t c = 0; c < tree.size(); ++c) {
      std::vector<std::string> tags = tree.classes()[c].tags;
      std::sort(tags.begin(), tags.end());
      tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
      double sum = 0.0;
      for (const auto& t : tags) sum += relatedness(model, spaces, sentence, t);
      EXPECT_NEAR(scores[c].score, sum / tags.size(), 1e-12);
    }
  }
}

TEST(ClassifyMultilabelTest, ThresholdIsStrict) {
  const auto s = scores_of({{"a", 0.5}, {"b", 0.51}, {"c", 0.2}});
  EXPECT_EQ(classify_multilabel(s), std::vector<std::string>{"b"});
  EXPECT_EQ(classify_multilabel(s, 0.0).size(), 3u);
  EXPECT_TRUE(classify_multilabel(s, 1.0).empty());
  EXPECT_THROW(classify_multilabel(s, 1.5), std::invalid_argument);
  EXPECT_THROW(classify_multilabel(s, -0.1), std::invalid_argument);
}

TEST(ClassifyMultilabelTest, MonotoneInThreshold) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ClassScores s;
  for (int c = 0; c < 10; ++c) s.push_back({"c" + std::to_string(c), u(rng), false});
  std::size_t previous = s.size() + 1;
  for (int k = 0; k <= 100; ++k) {
    const auto labels = classify_multilabel(s, k / 100.0);
    EXPECT_LE(labels.size(), previous);
    previous = labels.size();
  }
}

TEST(ClassifySingleTest, EarliestClassWinsTies) {
  EXPECT_EQ(classify_single(scores_of({{"a", 0.3}, {"b", 0.9}, {"c", 0.9}})), "b");
  EXPECT_EQ(classify_single(scores_of({{"a", 0.4}, {"b", 0.4}})), "a");
  EXPECT_THROW(classify_single({}), std::invalid_argument);
}

TEST(ClassifySingleTest, MatchesLinearScanAndIgnoresMonotoneTransforms) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    ClassScores s;
    const std::size_t n = 1 + rng() % 8;
    for (std::size_t c = 0; c < n; ++c) {
      // Coarse values so ties actually happen.
      s.push_back({"c" + std::to_string(c), static_cast<double>(rng() % 5) / 4.0, false});
    }
    EXPECT_EQ(classify_single(s), oracle::linear_scan_argmax(s));
    ClassScores t = s;
    for (auto& x : t) x.score = std::exp(3 * x.score) - 7;
    EXPECT_EQ(classify_single(t), classify_single(s));
  }
}

CategoryTree three_classes() {
  CategoryTree tree;
  tree.add_class("a", {"x"});
  tree.add_class("b", {"y"});
  tree.add_class("c", {"z"});
  return tree;
}

TEST(EvaluateScoresTest, HandCountedSingleMode) {
  const std::vector<ClassScores> scores = {
      scores_of({{"a", 0.9}, {"b", 0.1}, {"c", 0.2}}),
      scores_of({{"a", 0.2}, {"b", 0.8}, {"c", 0.1}}),
      scores_of({{"a", 0.1}, {"b", 0.2}, {"c", 0.7}}),
      scores_of({{"a", 0.1}, {"b", 0.6}, {"c", 0.3}}),
  };
  const LabeledDataset data{{{"s1", "a"}, {"s2", "b"}, {"s3", "c"}, {"s4", "c"}}};
  const auto r = evaluate_scores(scores, data, three_classes(), EvalMode::kSingle);
  EXPECT_EQ(r.accuracy, 0.75);
  EXPECT_EQ(r.correct, 3u);
  EXPECT_EQ(r.count, 4u);
  EXPECT_EQ(r.confusion.at("c").at("b"), 1u);
  EXPECT_EQ(r.confusion.at("c").at("c"), 1u);
  EXPECT_EQ(r.confusion.at("a").at("a"), 1u);
  const auto& b = r.per_class[1].second;
  EXPECT_EQ(r.per_class[1].first, "b");
  EXPECT_EQ(b.true_positives, 1u);
  EXPECT_EQ(b.false_positives, 1u);
  EXPECT_EQ(b.precision(), 0.5);
  EXPECT_EQ(r.per_class[2].second.recall(), 0.5);
}

TEST(EvaluateScoresTest, MultilabelNeedsExactlyTheGoldClass) {
  const std::vector<ClassScores> scores = {
      scores_of({{"a", 0.9}, {"b", 0.1}, {"c", 0.2}}),   // {a}: match
      scores_of({{"a", 0.9}, {"b", 0.8}, {"c", 0.1}}),   // {a, b}: no
      scores_of({{"a", 0.1}, {"b", 0.2}, {"c", 0.3}}),   // {}: no
  };
  const LabeledDataset data{{{"s1", "a"}, {"s2", "b"}, {"s3", "c"}}};
  const auto r = evaluate_scores(scores, data, three_classes(), EvalMode::kMultilabel);
  EXPECT_NEAR(r.accuracy, 1.0 / 3.0, 1e-15);
  EXPECT_EQ(r.per_class[0].second.false_positives, 1u);
  EXPECT_EQ(r.per_class[2].second.false_negatives, 1u);
  const auto none = evaluate_scores(scores, data, three_classes(), EvalMode::kMultilabel, 1.0);
  EXPECT_EQ(none.accuracy, 0.0);
}

TEST(EvaluateDatasetTest, UnknownLabelAndEmptySet) {
  const auto world = small_world();
  const auto model = RelatednessModel::zeros(Architecture::kMeanPool, 6, 0);
  CategoryTree news;
  news.add_class("business", {"topic0a"});
  news.add_class("technology", {"topic1a"});
  const LabeledDataset data{{{"c0w00", "business"}, {"c1w00", "sports"}}};
  try {
    evaluate_dataset(model, EmbeddingSpaces(world.store), data, news, EvalMode::kSingle);
    FAIL() << "expected UnknownLabel";
  } catch (const UnknownLabel& e) {
    EXPECT_EQ(e.label(), "sports");
  }
  EXPECT_THROW(evaluate_dataset(model, EmbeddingSpaces(world.store), LabeledDataset{},
                                news, EvalMode::kSingle),
               EmptyEvaluationSet);
}

TEST(EvaluateDatasetTest, AgreesWithPerItemScores) {
  const auto world = small_world();
  const auto all = synthetic::all_clusters(world);
  const auto tree = synthetic::make_tree(world, all);
  const auto data = synthetic::make_dataset(world, all, 12, 4);
  const auto model = RelatednessModel::create(Architecture::kTagConditionedLstm, 6, 4, 2);
  const EmbeddingSpaces spaces(world.store);
  std::vector<ClassScores> scores;
  for (const auto& item : data.items) {
    scores.push_back(class_scores(model, spaces, item.sentence, tree));
  }
  const auto direct = evaluate_dataset(model, spaces, data, tree, EvalMode::kSingle);
  const auto via = evaluate_scores(scores, data, tree, EvalMode::kSingle);
  EXPECT_EQ(direct.correct, via.correct);
  EXPECT_EQ(direct.confusion, via.confusion);
}

}  // namespace
}  // namespace zscat
