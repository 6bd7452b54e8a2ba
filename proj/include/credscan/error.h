#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace credscan {

// Base class for every error raised by the library. The CLI maps all of
// these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition or value-domain violation (bad id, empty input, shape mismatch).
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed input document. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// The remote peer answered, but with something that violates the protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Transport-level failure talking to a remote provider. Retryable.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, std::size_t chunk_index)
      : Error(what), chunk_index_(chunk_index) {}

  std::size_t chunk_index() const noexcept { return chunk_index_; }
  bool retryable() const noexcept { return true; }

 private:
  std::size_t chunk_index_;
};

// A metric whose value is 0/0 or otherwise not defined for the input.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace credscan
