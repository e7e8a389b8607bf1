#pragma once

// Subcommands of the ncfair tool. Everything is callable in-process so tests
// can drive the same code paths as the binary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ncfair/fairlds.hpp"
#include "ncfair/sdp.hpp"

namespace ncfair::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNonOptimal = 3 };

struct SweepConfig {
  std::vector<double> beta_grid;
  int repeats = 5;
  std::vector<fairlds::Mode> modes;
  std::uint64_t seed = 1;
  int horizon = 20;
  int advantaged = 3;  // advantaged trajectories kept from the generator
  double beta_a = 1.0;
  sdp::SolverConfig solver;
};

struct SweepRow {
  fairlds::Mode mode;
  double beta_d;
  int repeat;
  double nrmse_a, nrmse_d, gap;
  bool optimal;
};

/// Rows ordered by (mode as given, beta_d, repeat). Throws ValidationError on
/// an empty grid, repeats < 1 or a beta outside [0, 1].
std::vector<SweepRow> run_sweep(const SweepConfig& cfg);
void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& out);

struct BenchConfig {
  std::vector<int> horizons;
  std::vector<fairlds::Mode> modes;
  std::uint64_t seed = 1;
  int repeats = 3;
  bool solve = true;  // sizes only when false
  sdp::SolverConfig solver;
};

struct BenchRow {
  fairlds::Mode mode;
  int T;
  std::size_t moment_count;
  std::size_t sdp_dim;
  double wall_time;  // mean seconds over the repeats
};

/// Throws ValidationError for a horizon below 2.
std::vector<BenchRow> run_bench(const BenchConfig& cfg);
void write_bench_csv(const std::vector<BenchRow>& rows, std::ostream& out);

/// Parses and runs one command line (without the program name). Never
/// throws; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ncfair::cli
