#pragma once

#include <stdexcept>
#include <string>

namespace veristat {

/// Base of every error the library raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed delimited input, unreadable file, unparsable numeric cell.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Column selector out of range or naming an unknown column.
class SelectorError : public Error {
 public:
  using Error::Error;
};

/// A statistic was asked of data outside its domain (absent cells, empty or text column).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Structural problem in an analysis spec, plan or expectation.
class SpecError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in spec text; carries a 1-based source location.
class ParseError : public SpecError {
 public:
  ParseError(const std::string& message, int line, int column)
      : SpecError(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Join keys clash with non-key column names shared by both sides.
class DisambiguationError : public SpecError {
 public:
  using SpecError::SpecError;
};

/// Least-squares fit with zero residual sum of squares.
class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Rank-deficient design matrix.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// A point with leverage 1, for which the standardized residual is undefined.
class LeverageError : public Error {
 public:
  using Error::Error;
};

/// No answer could be obtained for an interactive confirmation.
class InteractionError : public Error {
 public:
  using Error::Error;
};

}  // namespace veristat
