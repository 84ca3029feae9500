#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semcap {

/// Base class for every error raised by the library. Callers that only need
/// to distinguish "bad input" from programming errors catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data did not match its declared format. `line()` is 1-based and 0
/// when the failure is not tied to a line (binary input, whole-file checks).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace semcap
