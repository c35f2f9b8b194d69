#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chiplattice {

/// Failure categories. Each maps to a distinct CLI exit code (see cli.hpp).
enum class ErrorKind {
  invalid_input,
  geometry,
  empty_result,
  convergence,
  divergence,
  not_a_minimum,
  no_resonance,
  insufficient_span,
  unknown_method,
  io,
  config,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) fail(kind, what);
}

}  // namespace chiplattice
