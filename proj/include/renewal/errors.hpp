#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace renewal {

/// A computation left the representable range (64-bit overflow, non-finite value).
class NumericFailure : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Rejection sampling could not reach the requested conditioning event.
class ConditioningUnreachable : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A request exceeds a documented guard rail (sieve limit, site-mode horizon).
class CapacityError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file; carries the 1-based line number of the offending row.
class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

}  // namespace renewal
