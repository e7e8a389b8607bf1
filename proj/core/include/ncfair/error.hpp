#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ncfair {

/// Raised when an argument violates an operation's precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised by the text readers; carries the 1-based line that failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NRMSE is undefined when a subgroup's observations have zero spread.
class DegenerateDenominatorError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace ncfair
