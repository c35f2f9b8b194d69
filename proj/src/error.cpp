#include "chiplattice/error.hpp"

namespace chiplattice {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid_input";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::empty_result: return "empty_result";
    case ErrorKind::convergence: return "convergence";
    case ErrorKind::divergence: return "divergence";
    case ErrorKind::not_a_minimum: return "not_a_minimum";
    case ErrorKind::no_resonance: return "no_resonance";
    case ErrorKind::insufficient_span: return "insufficient_span";
    case ErrorKind::unknown_method: return "unknown_method";
    case ErrorKind::io: return "io";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

}  // namespace chiplattice
