#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dilog {

/// Input or configuration rejected by a validating operation.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed atom or clause text. `offset()` is the byte position where
/// parsing stopped.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : ValidationError(what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, int step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}

  int step() const noexcept { return step_; }

 private:
  int step_;
};

}  // namespace dilog
