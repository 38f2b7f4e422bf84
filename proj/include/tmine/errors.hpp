#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tmine {

// Broad failure classes. The CLI maps these onto exit codes 1/2/3.
enum class ErrorKind { kData, kBackend, kConfig };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// ---- data errors ----

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class EmptyPhraseError : public DataError {
 public:
  EmptyPhraseError() : DataError("phrase is empty after normalization") {}
};

// A malformed input record. line_no is 1-based, 0 when unknown.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line_no, const std::string& what)
      : DataError("line " + std::to_string(line_no) + ": " + what), line_no_(line_no) {}
  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

class UnknownRelationError : public ParseError {
 public:
  UnknownRelationError(std::size_t line_no, const std::string& relation)
      : ParseError(line_no, "unknown relation '" + relation + "'"), relation_(relation) {}
  const std::string& relation() const noexcept { return relation_; }

 private:
  std::string relation_;
};

class NotApplicableError : public DataError {
 public:
  using DataError::DataError;
};

class SpanNotFoundError : public DataError {
 public:
  using DataError::DataError;
};

class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateDataError : public DataError {
 public:
  using DataError::DataError;
};

class SearchError : public DataError {
 public:
  using DataError::DataError;
};

class SamplingError : public DataError {
 public:
  using DataError::DataError;
};

// ---- backend errors ----

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error(ErrorKind::kBackend, what) {}
};

class TransportError : public BackendError {
 public:
  using BackendError::BackendError;
};

class LengthError : public BackendError {
 public:
  using BackendError::BackendError;
};

class UnknownTokenError : public BackendError {
 public:
  using BackendError::BackendError;
};

class MissingEntryError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Backend rejected a query as malformed (HTTP 400 on the wire).
class QueryError : public BackendError {
 public:
  using BackendError::BackendError;
};

// ---- configuration errors ----

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

}  // namespace tmine
