#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace solesense {

enum class ErrorKind {
  Domain,     // value outside a quantity's valid domain
  Range,      // value outside the range of an operation
  Ordering,   // timestamps going backwards
  Parse,      // malformed file content
  Fit,        // calibration data rejected
  Config,     // missing or inconsistent configuration
  Codec,      // telemetry frame decode failure
  Io,         // filesystem failure
  Network,    // transport failure
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Parse error carrying the 1-based line number of the offending record.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Raised when a sequence element fails; index is 0-based.
class IndexedError : public Error {
 public:
  IndexedError(ErrorKind kind, std::size_t index, const std::string& what)
      : Error(kind, "index " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace solesense
