#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace readtrace {

// Base of every error raised by the library. The subclasses map onto the
// exit codes of the CLI and the status codes of the HTTP service.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input: malformed records, out-of-range indices, unknown enum values.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what,
                           std::optional<std::size_t> index = std::nullopt)
      : Error(what), index_(index) {}

  // Position of the offending element inside a batch, when there is one.
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

// The request is well formed but contradicts current state (double submit).
class ConflictError : public Error {
 public:
  using Error::Error;
};

// No batch satisfying the assignment constraints could be found.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// A trial whose events or fixations reference words outside the stimulus.
class MalformedTrialError : public Error {
 public:
  using Error::Error;
};

// Zero variance, empty margins and other inputs a statistic is not defined on.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

}  // namespace readtrace
