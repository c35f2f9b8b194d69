#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "chiplattice/commands.hpp"
#include "chiplattice/error.hpp"

namespace {

const char* kFooter = R"(Commands:
  potential   sample U on a grid (csv | json)
  analyze     minima, trap frequencies, quartics, barriers, principal vectors
  compare     closed-form cell vs the six-beam sum
  phase-scan  random phase perturbations, translation fit, phase count
  misalign    depth/frequency profile up the z chain for tilted beams (json | csv)
  heat-scan   parametric heating spectrum (csv | json)
  capture     captured fraction per intensity scale
  drsc        Lamb-Dicke, Zeeman resonance field and scattering estimates

Exit codes:
  0  ok                  7  divergence
  1  internal error      8  compare failed (deviation above tolerance)
  2  usage or config     9  io
  3  invalid input      10  insufficient span
  4  geometry           11  no resonance
  5  empty result       12  not a minimum
  6  convergence        13  unknown method

Environment:
  CHIPLATTICE_THREADS    worker threads (default: hardware concurrency)
  CHIPLATTICE_ISA        scalar | avx2 (default: best available)
  CHIPLATTICE_TIMESTAMP  fixed report timestamp, for reproducible output
)";

int report_error(std::string_view kind, const std::string& message, int code) {
  std::cerr << chiplattice::error_json(kind, message, code) << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  namespace cl = chiplattice;
  CLI::App app{"chiplattice: optical lattices above a reflecting chip surface"};
  app.footer(kFooter);
  std::string command, config_path, out_path, format;
  std::uint64_t seed = 0;
  int grid = 0;
  app.add_option("command", command, "command to run")
      ->required()
      ->check(CLI::IsMember(cl::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  auto* out_opt = app.add_option("--out", out_path, "output file (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed, "RNG seed, overrides dynamics.seed");
  auto* grid_opt = app.add_option("--grid", grid, "grid resolution per sampled axis");
  auto* format_opt =
      app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), cl::exit_code::usage);
  }

  try {
    cl::CommandOptions opt;
    if (*seed_opt) opt.seed = seed;
    if (*grid_opt) opt.grid = grid;
    if (*format_opt) opt.format = format;
    const cl::RunConfig cfg = cl::load_config(config_path);
    const cl::CommandOutput result = cl::run_command(command, cfg, opt);
    if (*out_opt) {
      std::ofstream f(out_path, std::ios::binary);
      if (!f) return report_error("io", "cannot open " + out_path, cl::exit_code::io);
      f << result.text;
      if (!f) return report_error("io", "write failed: " + out_path, cl::exit_code::io);
    } else {
      std::fwrite(result.text.data(), 1, result.text.size(), stdout);
    }
    if (result.check_failed)
      return report_error("compare_failed", "deviation above tolerance", cl::exit_code::compare_failed);
    return cl::exit_code::ok;
  } catch (const cl::Error& e) {
    return report_error(cl::to_string(e.kind()), e.what(), cl::exit_code_for(e.kind()));
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), cl::exit_code::internal);
  }
}
