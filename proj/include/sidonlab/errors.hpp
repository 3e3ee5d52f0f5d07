#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sidon {

// Bad argument: coordinate out of range, malformed parameters.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input text could not be parsed. line() is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A computation would exceed a configured feasibility guard.
class FeasibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The hypothesis of a lemma/bound is not met by the given inputs.
class HypothesisError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sidon
