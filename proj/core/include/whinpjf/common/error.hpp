#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace whinpjf {

/// Broad failure class; the CLI maps it onto a process exit code.
enum class ErrorCategory {
  usage,    ///< invalid configuration or command-line input
  data,     ///< malformed, missing or inconsistent files
  numeric,  ///< NaN/Inf, degenerate numerical input
  contract  ///< caller violated an API precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Operand shapes are incompatible.
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

/// API precondition violated (wrong entity kind, backward twice, ...).
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

/// Reduction over an empty operand.
class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

/// A text row could not be parsed; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(ErrorCategory::data, file + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// An edge or pair references an entity that does not exist.
class IntegrityError : public Error {
 public:
  explicit IntegrityError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Binary container has the wrong magic, version or size.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// A required upstream artifact (checkpoint, table) is missing.
class DependencyError : public Error {
 public:
  explicit DependencyError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// Training diverged or produced non-finite values.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

/// Input is numerically degenerate (rank-0 data, single-class labels, ...).
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

/// Sampling cannot satisfy its contract (e.g. no valid negative exists).
class SamplingError : public Error {
 public:
  explicit SamplingError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

}  // namespace whinpjf
