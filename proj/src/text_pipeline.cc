#include "zscat/text_pipeline.h"

#include <cctype>
#include <stdexcept>

#include "zscat/errors.h"

namespace zscat {
namespace {

bool is_punct(char ch) { return std::ispunct(static_cast<unsigned char>(ch)); }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;

    std::size_t first = pos;
    std::size_t last = end;
    while (first < last && is_punct(text[first])) ++first;
    while (last > first && is_punct(text[last - 1])) --last;
    if (first < last) {
      std::string token(text.substr(first, last - first));
      for (char& ch : token) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      }
      tokens.push_back(std::move(token));
    }
    pos = end;
  }
  return tokens;
}

TokenSequence normalize_length(const std::vector<std::string>& tokens,
                               std::size_t target_length) {
  if (target_length == 0) {
    throw std::invalid_argument("target length must be at least 1");
  }
  if (tokens.empty()) throw EmptySentence();
  for (const auto& token : tokens) {
    if (token.empty()) throw std::invalid_argument("empty token");
  }
  std::vector<std::string> out;
  out.reserve(target_length);
  for (std::size_t i = 0; i < target_length; ++i) {
    out.push_back(tokens[i % tokens.size()]);
  }
  return TokenSequence(std::move(out));
}

}  // namespace zscat
