#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clarke_kkt {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem-file syntax or semantic error with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& what)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Expression evaluated outside its domain (division by zero, overflow to a non-finite value).
class EvaluationDomainError : public Error {
 public:
  using Error::Error;
};

/// A sampled estimator produced a non-finite quotient or an empty sample.
class EstimationFailure : public Error {
 public:
  using Error::Error;
};

/// The Slater-direction feasibility solve neither certified nor refuted feasibility.
class CqIndeterminate : public Error {
 public:
  using Error::Error;
};

}  // namespace clarke_kkt
