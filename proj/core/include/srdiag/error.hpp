#pragma once

#include <stdexcept>
#include <string>

namespace srdiag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain (bad dims, sizes, ratios).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A configuration is inconsistent or incomplete (missing model, bad stage order).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Structured input could not be parsed. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), detail_(what), line_(line) {}
  int line() const noexcept { return line_; }
  /// The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
  int line_;
};

/// File-system or codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace srdiag
