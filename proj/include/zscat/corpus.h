#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <vector>

namespace zscat {

struct CorpusRecord {
  std::string text;                 // sentence as it appeared in the source
  std::vector<std::string> tokens;  // tokenize(text), not length-normalized
  std::vector<std::string> tags;    // distinct, in first-seen order
};

// Sentences with their related tag phrases. The tag vocabulary is always the
// union of the record tag sets.
class Corpus {
 public:
  Corpus() = default;

  // Drops duplicate tags; throws std::invalid_argument if `tags` is empty.
  void add(std::string text, std::vector<std::string> tokens,
           std::vector<std::string> tags);

  const std::vector<CorpusRecord>& records() const { return records_; }
  const std::set<std::string>& tag_vocabulary() const { return vocabulary_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t positive_pair_count() const;

 private:
  std::vector<CorpusRecord> records_;
  std::set<std::string> vocabulary_;
};

}  // namespace zscat
