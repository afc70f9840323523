#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace unithood {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments or violated preconditions.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what) : Error(what) {}
};

class DuplicateDocIdError : public ArgumentError {
 public:
  explicit DuplicateDocIdError(const std::string& id)
      : ArgumentError("duplicate doc_id: " + id), doc_id_(id) {}
  const std::string& doc_id() const { return doc_id_; }

 private:
  std::string doc_id_;
};

// Malformed input line; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Structurally valid input with inconsistent content (offsets, field types).
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(what) {}
};

// Network or response failure for a count query. Safe to retry.
class TransportError : public Error {
 public:
  TransportError(const std::string& query, const std::string& what)
      : Error("query [" + query + "]: " + what), query_(query) {}
  const std::string& query() const { return query_; }

 private:
  std::string query_;
};

class UnsupportedOperationError : public Error {
 public:
  explicit UnsupportedOperationError(const std::string& what) : Error(what) {}
};

// Sample space size N is zero or unobtainable.
class InvalidSampleSpaceError : public Error {
 public:
  explicit InvalidSampleSpaceError(const std::string& what) : Error(what) {}
};

// MI is undefined because a marginal count is zero; callers skip the pair.
class UndefinedMarginalError : public Error {
 public:
  explicit UndefinedMarginalError(const std::string& what) : Error(what) {}
};

// IDR denominator is zero; callers treat the affected conjunct as failed.
class DivisionUndefinedError : public Error {
 public:
  explicit DivisionUndefinedError(const std::string& what) : Error(what) {}
};

class EstimationFailureError : public Error {
 public:
  explicit EstimationFailureError(const std::string& what) : Error(what) {}
};

// Decisions referenced pair keys absent from the gold set.
class MissingGoldError : public Error {
 public:
  explicit MissingGoldError(std::vector<std::string> offenders)
      : Error(build_message(offenders)), offenders_(std::move(offenders)) {}
  const std::vector<std::string>& offenders() const { return offenders_; }

 private:
  static std::string build_message(const std::vector<std::string>& keys) {
    std::string msg = "pair keys missing from gold set:";
    for (const auto& k : keys) msg += " [" + k + "]";
    return msg;
  }
  std::vector<std::string> offenders_;
};

}  // namespace unithood
