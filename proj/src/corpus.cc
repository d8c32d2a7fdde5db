#include "zscat/corpus.h"

#include <algorithm>
#include <stdexcept>

namespace zscat {

void Corpus::add(std::string text, std::vector<std::string> tokens,
                 std::vector<std::string> tags) {
  std::vector<std::string> distinct;
  for (auto& tag : tags) {
    if (tag.empty()) continue;
    if (std::find(distinct.begin(), distinct.end(), tag) == distinct.end()) {
      distinct.push_back(std::move(tag));
    }
  }
  if (distinct.empty()) throw std::invalid_argument("corpus record without tags");
  vocabulary_.insert(distinct.begin(), distinct.end());
  records_.push_back({std::move(text), std::move(tokens), std::move(distinct)});
}

std::size_t Corpus::positive_pair_count() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.tags.size();
  return n;
}

}  // namespace zscat
