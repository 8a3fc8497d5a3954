#pragma once

#include <stdexcept>
#include <string>

namespace llwlc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed input text (edge lists, dumps). Carries a 1-based line number.
class ParseError : public Error {
public:
  ParseError(const std::string& msg, int line)
      : Error(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const { return line_; }

private:
  int line_;
};

/// A precondition on arguments or data was violated.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A constraint column came out empty (no usable nonzero entries).
class EmptyConstraintError : public Error {
public:
  using Error::Error;
};

/// Numerical degeneracy the solver could not work around.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace llwlc
