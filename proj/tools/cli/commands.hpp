#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dgame::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitAssumption = 2,     // regularity, index, stabilizability, index raised
  kExitNoEquilibrium = 3,  // forward solver found nothing
  kExitEmptySet = 4,       // inverse solution set empty / not a member
  kExitUnstable = 5,       // closed loop not stable
};

struct Options {
  // Global.
  std::uint64_t seed = 0;
  double tol = 1e-9;
  int starts = 64;
  double eps_pd = 1e-8;
  std::string out;       // report JSON path
  std::string cost_set;  // name inside cost_sets; empty = `costs`

  // inverse
  bool diagonal_q = false;
  std::string trajectory;  // CSV to fit F from

  // misspecify / verify
  std::string theta_file;
  int nash_trials = 200;

  // simulate / misspecify
  std::vector<double> x1;  // reduced initial state, default all ones
  double horizon = 10.0;
  double dt = 0.01;
  std::string csv;  // trajectory output path
  std::optional<std::uint64_t> preimage_seed;
};

/// Runs one command and returns its exit code. Human-readable output goes
/// to `out`, diagnostics to `err`; the JSON report is written to
/// opts.out when set.
int run_command(const std::string& command, const std::filesystem::path& problem,
                const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace dgame::cli
