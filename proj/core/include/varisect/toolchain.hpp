#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "varisect/bisect.hpp"
#include "varisect/compilation.hpp"
#include "varisect/config.hpp"
#include "varisect/element.hpp"
#include "varisect/testfn.hpp"
#include "varisect/value.hpp"

namespace varisect {

class BuildError : public ToolchainError {
 public:
  BuildError(const std::string& msg, std::string diagnostics)
      : ToolchainError(msg), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

class RunError : public ToolchainError {
 public:
  RunError(const std::string& msg, std::string diagnostics)
      : ToolchainError(msg), diagnostics_(std::move(diagnostics)) {}
  const std::string& diagnostics() const { return diagnostics_; }

 private:
  std::string diagnostics_;
};

/// How one executable is assembled: which files get the candidate
/// compilation, and optionally which exported symbols of one
/// position-independent file are taken from its candidate copy.
struct BuildPlan {
  Compilation candidate;
  Compilation baseline;
  ElementSet candidate_files;  // File elements; all others build as baseline
  bool pic_override = false;
  struct Weakened {
    Element file;
    std::vector<std::string> chosen;  // symbols kept strong in the candidate copy
  };
  std::optional<Weakened> weakened;  // implies pic_override
};

struct PreflightReport {
  bool deterministic = true;
  std::vector<std::string> offending_tests;
  int runs = 0;
};

/// The real-build test backend. Compiles project files under arbitrary
/// compilations with an object cache, mixes object files (and, via weak
/// symbols, function versions) into runnable executables, runs the
/// project's test executable, and compares against cached baseline outputs.
/// One backend instance owns one results directory.
class ToolchainBackend {
 public:
  ToolchainBackend(RunSettings settings, std::filesystem::path results_dir,
                   std::size_t jobs = 1);

  const RunSettings& settings() const { return settings_; }
  const ProjectManifest& manifest() const { return settings_.manifest; }
  ElementSet file_universe() const { return manifest().file_universe(); }
  const std::filesystem::path& results_dir() const { return results_dir_; }

  /// Compiles one project file under one compilation, reusing the object
  /// cache when the (file, compilation, pic) key was built before.
  std::filesystem::path compile_object(const std::string& file,
                                       const Compilation& compilation,
                                       bool pic);
  /// Actual compiler invocations so far (cache hits excluded).
  std::size_t compiler_invocations() const { return compiler_invocations_; }

  /// Builds the executable described by the plan. Objects for independent
  /// files compile concurrently up to the configured job count; the link is
  /// serial. Throws BuildError with captured diagnostics on any failure.
  std::filesystem::path build_mixed(const BuildPlan& plan);

  /// Globally exported strong function symbols of an object file, in
  /// symbol-table order, as Symbol elements of `file`. Demangled names are
  /// attached for display.
  ElementSet list_exported_symbols(const std::filesystem::path& object,
                                   const std::string& file);

  /// Runs the test executable per the wire protocol (`--test <name>
  /// --input <path>`), once per input chunk, and concatenates per-run
  /// results. Throws RunError on nonzero exit, timeout, or malformed
  /// output.
  TestValue run_test_executable(const std::filesystem::path& exe,
                                const TestSpec& spec);
  /// One timed execution of all chunks; output is discarded.
  double time_test_executable(const std::filesystem::path& exe,
                              const TestSpec& spec);

  /// Output of the correctness baseline for this test, computed once and
  /// cached (in memory and under results/baseline/).
  const TestValue& baseline_output(const TestSpec& spec);

  /// Determinism gate: re-runs every test `preflight_runs` times under the
  /// baseline and demands bitwise-identical output bytes.
  PreflightReport preflight();

  /// File-granularity test for one candidate compilation: the score of a
  /// file set is the worst per-test comparison against the baseline over
  /// `test_names` (all configured tests when empty).
  MemoizedTest make_file_test(const Compilation& candidate,
                              const std::vector<std::string>& test_names = {});

  /// Symbol-granularity search context for one file found variable. The
  /// file is rebuilt position-independent under both compilations; when
  /// that rebuild alone removes the variability (or the file exports no
  /// function symbols), the search cannot go deeper and `file_level_only`
  /// is set with no test attached.
  SymbolSearch make_symbol_search(const Compilation& candidate,
                                  const Element& file,
                                  const std::vector<std::string>& test_names = {});

  /// Adapter feeding make_symbol_search to the hierarchical driver.
  SymbolProvider symbol_provider(const Compilation& candidate,
                                 const std::vector<std::string>& test_names = {});

 private:
  struct SpecSelection;
  std::vector<const TestSpec*> selected_specs(
      const std::vector<std::string>& test_names) const;
  std::filesystem::path input_file(const TestSpec& spec, std::size_t chunk,
                                   const std::vector<double>& values);
  std::filesystem::path weaken_copy(const std::filesystem::path& object,
                                    const std::vector<std::string>& symbols,
                                    const std::filesystem::path& out);
  std::vector<std::string> defined_strong_globals(
      const std::filesystem::path& object);
  TestScore evaluate_plan(const BuildPlan& plan,
                          const std::vector<const TestSpec*>& specs);
  void log_evaluation(const BuildPlan& plan, const TestScore& score,
                      double seconds);

  RunSettings settings_;
  std::filesystem::path results_dir_;
  std::filesystem::path objects_dir_;
  std::filesystem::path builds_dir_;
  std::filesystem::path inputs_dir_;
  std::size_t jobs_ = 1;
  std::map<std::string, std::string> env_;
  std::map<std::string, TestValue> baseline_outputs_;
  std::map<std::string, std::string> baseline_wire_;  // raw bytes per test
  std::mutex mutex_;
  std::size_t compiler_invocations_ = 0;
  std::ofstream run_log_;
};

}  // namespace varisect
