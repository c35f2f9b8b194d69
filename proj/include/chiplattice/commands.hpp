#pragma once

// The CLI's commands as library calls: each takes a parsed config and returns the exact text
// the tool writes.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "chiplattice/config.hpp"
#include "chiplattice/error.hpp"

namespace chiplattice {

struct CommandOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> grid;
  std::optional<std::string> format;  // csv | json
};

struct CommandOutput {
  std::string text;
  bool check_failed = false;  // compare: deviation above tolerance
};

const std::vector<std::string>& command_names();

/// Runs `name`; throws chiplattice::Error on failure.
CommandOutput run_command(const std::string& name, const RunConfig& cfg,
                          const CommandOptions& opt);

/// Process exit codes.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int usage = 2;  // bad arguments or config
inline constexpr int invalid_input = 3;
inline constexpr int geometry = 4;
inline constexpr int empty_result = 5;
inline constexpr int convergence = 6;
inline constexpr int divergence = 7;
inline constexpr int compare_failed = 8;
inline constexpr int io = 9;
inline constexpr int insufficient_span = 10;
inline constexpr int no_resonance = 11;
inline constexpr int not_a_minimum = 12;
inline constexpr int unknown_method = 13;
}  // namespace exit_code

int exit_code_for(ErrorKind kind);

/// {"error": {"kind", "message", "exit_code"}} on one line.
std::string error_json(std::string_view kind, std::string_view message, int code);

}  // namespace chiplattice
