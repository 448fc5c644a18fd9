#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "varisect/compilation.hpp"
#include "varisect/config.hpp"
#include "varisect/score.hpp"
#include "varisect/toolchain.hpp"

namespace varisect {

/// One (compilation, test) cell of the sweep: its comparison score against
/// the correctness baseline and its timing statistics.
struct SweepRecord {
  Compilation compilation;
  std::string test;
  TestScore score;
  std::vector<double> wall_times;
  double median_time = 0.0;

  bool completed() const { return score.measured(); }
  bool bitwise_equal() const { return score.zero(); }
  bool variable() const { return score.positive(); }
};

/// The compilation matrix: every (compiler, level) paired with each single
/// switch combination and with no switch at all, deduplicated, and always
/// containing both baselines.
std::vector<Compilation> plan_matrix(const RunSettings& settings);

struct SweepOptions {
  int runs_per_timing = 3;
  bool resume = false;
};

/// Runs the matrix over every configured test. Each cell builds the
/// full-candidate executable, takes one scored (untimed) run against the
/// baseline output, then `runs_per_timing` serial timed runs. Records append
/// to `records_path` as they complete; with `resume`, cells already present
/// there are not re-run. Per-cell failures are recorded and the sweep moves
/// on.
std::vector<SweepRecord> run_sweep(ToolchainBackend& backend,
                                   const std::vector<Compilation>& matrix,
                                   const SweepOptions& options,
                                   const std::filesystem::path& records_path);

/// Reads persisted sweep records (one JSON object per line).
std::vector<SweepRecord> load_sweep_records(
    const std::filesystem::path& records_path);

struct SeriesPoint {
  std::string compilation_id;
  double speedup = 0.0;
  bool bitwise_equal = false;
};

struct VariabilityStats {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

struct CompilerSummary {
  std::string compiler_id;
  std::size_t variable_runs = 0;
  std::size_t total_runs = 0;
  double variable_percent = 0.0;
  std::optional<Compilation> best_flags;  // highest mean speedup across tests
  std::optional<double> mean_speedup;
};

struct TestBest {
  std::optional<SeriesPoint> fastest_bitwise_equal;
  std::optional<SeriesPoint> fastest_variable;
};

struct FailureNote {
  std::string compilation_id;
  std::string test;
  std::string reason;
};

struct SweepSummary {
  /// Per test, all completed cells sorted ascending by speedup.
  std::map<std::string, std::vector<SeriesPoint>> series;
  /// Per test, spread of the nonzero scores; absent when every cell matched
  /// the baseline.
  std::map<std::string, std::optional<VariabilityStats>> variability;
  std::vector<CompilerSummary> compilers;
  std::map<std::string, TestBest> best;
  std::vector<FailureNote> failures;
};

/// Pure aggregation of persisted records; summarizing twice yields the same
/// summary. Speedups are relative to the performance reference's median
/// time on the same test (the reference cell itself is exactly 1.0).
SweepSummary summarize(const std::vector<SweepRecord>& records,
                       const ProjectManifest& manifest);

/// Writes summary.json and series/<test>.csv under `out_dir`.
void write_summary(const SweepSummary& summary,
                   const std::filesystem::path& out_dir);

double median_of(std::vector<double> values);

}  // namespace varisect
