#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace zscat {

// Root of every error raised by the library. Callers that only care about
// "the input was bad" can catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptySentence : public Error {
 public:
  EmptySentence() : Error("sentence has no tokens") {}
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class MalformedEmbeddingFile : public Error {
 public:
  using Error::Error;
};

class AllWordsOutOfVocabulary : public Error {
 public:
  explicit AllWordsOutOfVocabulary(const std::string& phrase)
      : Error("no word of \"" + phrase + "\" is in the embedding vocabulary") {}
};

class StaleCache : public Error {
 public:
  StaleCache() : Error("forward cache was produced by different model parameters") {}
};

class CorruptCheckpoint : public Error {
 public:
  using Error::Error;
};

class DegenerateVocabulary : public Error {
 public:
  using Error::Error;
};

class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t epoch, std::size_t batch)
      : Error("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch)),
        epoch_(epoch),
        batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

class EmptyEvaluationSet : public Error {
 public:
  EmptyEvaluationSet() : Error("evaluation set is empty") {}
};

class UnknownLabel : public Error {
 public:
  explicit UnknownLabel(const std::string& label)
      : Error("label \"" + label + "\" is not a class of the category tree"),
        label_(label) {}

  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

// Parse errors carry the 1-based line number of the offending input line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class MalformedRecord : public ParseError {
 public:
  using ParseError::ParseError;
};

class MalformedTreeLine : public ParseError {
 public:
  using ParseError::ParseError;
};

class DuplicateClass : public ParseError {
 public:
  using ParseError::ParseError;
};

class EmptyTagList : public ParseError {
 public:
  using ParseError::ParseError;
};

class UnknownCategoryCode : public ParseError {
 public:
  using ParseError::ParseError;
};

class DegenerateSplit : public Error {
 public:
  using Error::Error;
};

}  // namespace zscat
