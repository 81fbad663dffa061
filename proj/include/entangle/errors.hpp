#pragma once

#include <stdexcept>
#include <string>

namespace entangle {

/// Base class for every error raised by the library. The CLI maps the
/// concrete subclasses onto its exit-code contract.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (bad corpus, bad plan, bad config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized input. Carries the 1-based line number when known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : ValidationError(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss or parameters during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace entangle
