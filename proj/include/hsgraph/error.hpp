#pragma once

#include <stdexcept>
#include <string>

namespace hsgraph {

/// Caller misuse: wrong graph kind, mismatched inputs, bad flags.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data cannot support the requested computation.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record. `line` is 1-based; `field` is empty when the
/// whole line is unreadable.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, std::string field, const std::string& what)
      : DataError("line " + std::to_string(line) +
                  (field.empty() ? std::string() : " field '" + field + "'") +
                  ": " + what),
        line_(line),
        field_(std::move(field)) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

}  // namespace hsgraph
