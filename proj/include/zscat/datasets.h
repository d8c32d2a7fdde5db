#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <string>

#include "zscat/corpus.h"
#include "zscat/zeroshot_inference.h"

namespace zscat {

struct ParsedCorpus {
  Corpus corpus;
  // Lines that had a tab but no usable tag or no usable sentence token.
  std::size_t dropped_records = 0;
};

// "sentence<TAB>tag, tag, ..." per line. Tags are trimmed, lowercased and
// deduplicated; blank lines are skipped. Throws MalformedRecord for a
// non-blank line without a tab.
ParsedCorpus parse_corpus(std::istream& in);
ParsedCorpus parse_corpus_file(const std::string& path);
void write_corpus(std::ostream& out, const Corpus& corpus);

// "class: tag, tag, ..." per line, blank lines and '#' comments skipped.
CategoryTree parse_category_tree(std::istream& in);
CategoryTree parse_category_tree_file(const std::string& path);
void write_category_tree(std::ostream& out, const CategoryTree& tree);

enum class DatasetFormat {
  // UCI News Aggregator CSV: TITLE in column 2, CATEGORY code in column 5
  // (b, t, e, m). A leading header row is detected and skipped.
  kUciCsv,
  // "sentence<TAB>class" per line.
  kTsv,
};

LabeledDataset parse_labeled_dataset(std::istream& in, DatasetFormat format);
LabeledDataset parse_labeled_dataset_file(const std::string& path,
                                          DatasetFormat format);
void write_labeled_dataset_tsv(std::ostream& out, const LabeledDataset& dataset);

// Maps b/t/e/m to business/technology/entertainment/medicine.
std::string uci_category_name(std::string_view code, std::size_t line = 0);

struct CorpusSplit {
  Corpus train;
  Corpus test;
  std::set<std::string> train_tags;
  std::set<std::string> test_tags;
  std::set<std::string> test_only_tags;  // in test but never in train
};

// A record goes to the test side when a seeded hash of its text falls below
// `test_fraction`. Throws std::invalid_argument unless 0 < test_fraction < 1
// and DegenerateSplit if either side comes out empty.
CorpusSplit split_corpus(const Corpus& corpus, double test_fraction,
                         std::uint64_t seed);

}  // namespace zscat
