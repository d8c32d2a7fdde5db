#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace zscat {

// Sentence length every input is truncated or cyclically padded to.
inline constexpr std::size_t kDefaultTargetLength = 28;

// A sentence after length normalization. Always holds exactly the target
// length of non-empty tokens.
class TokenSequence {
 public:
  const std::vector<std::string>& tokens() const { return tokens_; }
  std::size_t length() const { return tokens_.size(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

 private:
  friend TokenSequence normalize_length(const std::vector<std::string>&,
                                        std::size_t);
  explicit TokenSequence(std::vector<std::string> tokens)
      : tokens_(std::move(tokens)) {}

  std::vector<std::string> tokens_;
};

// Lowercases, splits on whitespace, strips punctuation at both ends of each
// token and drops tokens that end up empty. Inner punctuation ("gop's") is
// kept.
std::vector<std::string> tokenize(std::string_view text);

// Truncates to the first `target_length` tokens, or repeats the whole token
// list cyclically until it is `target_length` long. Throws EmptySentence for
// an empty list and std::invalid_argument for target_length == 0.
TokenSequence normalize_length(const std::vector<std::string>& tokens,
                               std::size_t target_length = kDefaultTargetLength);

}  // namespace zscat
