#pragma once

#include <stdexcept>
#include <string>

namespace decor {

/// Base class for every error raised by the routing engine.
class RoutingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownDifficulty : public RoutingError {
 public:
  explicit UnknownDifficulty(const std::string& text)
      : RoutingError("unknown difficulty token: '" + text + "'") {}
};

class EmptyLabel : public RoutingError {
 public:
  EmptyLabel() : RoutingError("label normalizes to the empty string") {}
};

class InvalidProfile : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

class InvalidConfig : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

class EmptyQuery : public RoutingError {
 public:
  EmptyQuery() : RoutingError("query must be non-empty") {}
};

class MalformedJson : public RoutingError {
 public:
  explicit MalformedJson(const std::string& detail)
      : RoutingError("malformed JSON payload: " + detail) {}
};

class MissingField : public RoutingError {
 public:
  explicit MissingField(const std::string& name)
      : RoutingError("missing required field: '" + name + "'"), field_(name) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class BackendUnavailable : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

class DeconstructionFailed : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

class DimensionMismatch : public RoutingError {
 public:
  DimensionMismatch(std::size_t lhs, std::size_t rhs)
      : RoutingError("embedding dimension mismatch: " + std::to_string(lhs) +
                     " vs " + std::to_string(rhs)) {}
};

class TooManyCandidates : public RoutingError {
 public:
  explicit TooManyCandidates(std::size_t n)
      : RoutingError("evaluator prompt supports at most 26 candidates, got " +
                     std::to_string(n)) {}
};

class UnknownLabelLetter : public RoutingError {
 public:
  explicit UnknownLabelLetter(const std::string& letter)
      : RoutingError("candidate label out of range: '" + letter + "'") {}
};

class NoEligibleModels : public RoutingError {
 public:
  NoEligibleModels()
      : RoutingError("no candidate model has records in the matched entries") {}
};

class IoError : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

class ParseError : public RoutingError {
 public:
  ParseError(std::size_t line, const std::string& detail)
      : RoutingError("line " + std::to_string(line) + ": " + detail),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public RoutingError {
 public:
  explicit DuplicateId(const std::string& id)
      : RoutingError("duplicate entry id: '" + id + "'"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class InvariantViolation : public RoutingError {
 public:
  InvariantViolation(std::size_t line, const std::string& field,
                     const std::string& detail)
      : RoutingError("line " + std::to_string(line) + ", field '" + field +
                     "': " + detail) {}
};

class AllRecordsFailed : public RoutingError {
 public:
  AllRecordsFailed()
      : RoutingError("every raw record failed deconstruction") {}
};

class MissingRecord : public RoutingError {
 public:
  MissingRecord(const std::string& case_id, const std::string& model)
      : RoutingError("test case '" + case_id + "' has no record for model '" +
                     model + "'") {}
};

class EmptyStore : public RoutingError {
 public:
  EmptyStore() : RoutingError("operation requires a non-empty store") {}
};

class InvalidGridValue : public RoutingError {
 public:
  using RoutingError::RoutingError;
};

}  // namespace decor
