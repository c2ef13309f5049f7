#pragma once

#include <stdexcept>
#include <string>

namespace rcast {

/// Failure categories. The CLI maps each one onto a stable exit code.
enum class ErrorKind {
  config,               // invalid or out-of-range configuration
  format,               // malformed input file
  io,                   // file system failure
  dimension,            // shape mismatch between arguments
  domain,               // argument outside the function's domain
  insufficient_history, // not enough time steps for embedding / lead
  singular,             // numerically singular linear system
  degenerate_reservoir, // reservoir draws with vanishing spectral radius
  blow_up,              // simulator state exceeded the stability bound
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

inline void require(bool ok, ErrorKind kind, const std::string& what) {
  if (!ok) fail(kind, what);
}

}  // namespace rcast
