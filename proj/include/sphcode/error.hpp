#pragma once

#include <stdexcept>
#include <string>

namespace sphcode {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on a mathematical input failed (bad angle, singular basis, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries the 1-based position of the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line, int column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// An enumeration or oracle budget was too small to answer the query.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sphcode
