#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "varisect/bisect.hpp"
#include "varisect/element.hpp"
#include "varisect/testfn.hpp"

namespace varisect {
namespace sim {

/// How ground-truth variability is injected into a synthetic project.
enum class Mode {
  Independent,   // each injected symbol contributes on its own
  Coupled,       // injections come in pairs that only score jointly
  ZeroMagnitude, // injections exist but have no observable effect
  NonExported,   // injected symbols are hidden; an exported caller carries
                 // their score at symbol granularity
};

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct Injection {
  Element site;
  double magnitude = 0.0;
  /// For a non-exported site: the exported symbol in the same file that the
  /// score is attributed to at symbol granularity, if one exists.
  std::optional<Element> caller;
};

struct CoupledPair {
  Element first;
  Element second;
  double magnitude = 0.0;
};

/// A generated project with known blame. Subset scores are sums of the
/// magnitudes present; magnitudes are distinct powers of two, so every
/// distinct subset has a distinct score and all search assumptions hold by
/// construction in Independent mode.
struct SyntheticProject {
  std::uint64_t seed = 0;
  std::vector<std::string> files;
  std::vector<std::vector<std::string>> symbols;        // per file
  std::vector<std::vector<bool>> symbol_exported;       // parallel to symbols
  std::vector<Injection> injections;
  std::vector<CoupledPair> coupling;
  /// When set, file-granularity contributions are scaled down to a quarter,
  /// making every injected file score below its own best symbol (the
  /// file-dominance assumption no longer holds).
  bool sub_file_cancellation = false;

  ElementSet file_universe() const;
  ElementSet exported_symbols_of(const Element& file) const;
  Element file_element(std::size_t file_index) const;
  Element symbol_element(std::size_t file_index, std::size_t sym_index) const;

  /// Every element the search is expected to report for this project:
  /// injected files, plus injected symbols (or their callers).
  std::vector<Element> expected_findings() const;
};

/// Deterministic in all arguments. Injection sites are drawn without
/// replacement; magnitudes are 2^-1, 2^-2, ... in draw order (0 in
/// ZeroMagnitude mode). In Coupled mode `n_injections` counts pairs.
SyntheticProject generate_project(std::uint64_t seed, std::size_t n_files,
                                  std::size_t symbols_per_file,
                                  std::size_t n_injections, Mode mode);

/// File-granularity test: the score of a file set is the score of the union
/// of all its symbols.
MemoizedTest make_file_test(const SyntheticProject& project);

/// Symbol-granularity test restricted to one file: only that file's symbols
/// contribute (all other files are held at baseline), and non-exported
/// injected symbols contribute through their designated caller.
MemoizedTest make_symbol_test(const SyntheticProject& project,
                              const Element& file);

/// Adapter for the hierarchical search: serves each found file's exported
/// symbols with a fresh symbol-granularity test.
SymbolProvider symbol_provider(const SyntheticProject& project);

enum class InjectionOutcome {
  ExactFind,     // the injected symbol itself was reported
  IndirectFind,  // the site is not exported; its file (and caller, when one
                 // exists) was reported
  WrongFind,     // something with no injected ancestry was reported
  MissedFind,    // measurable variability, but the blame was not reported
  NotMeasurable, // the injection has no observable effect
};

const char* to_string(InjectionOutcome outcome);

struct CampaignConfig {
  std::uint64_t seed = 0;
  std::size_t n_files = 45;
  std::size_t symbols_per_file = 25;
  std::size_t count = 500;
  Mode mode = Mode::Independent;
  std::optional<std::size_t> k;  // biggest-k search instead of the full one
};

struct InjectionRecord {
  std::uint64_t instance_seed = 0;
  InjectionOutcome outcome = InjectionOutcome::NotMeasurable;
  std::size_t distinct_evaluations = 0;
  std::vector<SearchLevel> levels;
  AssertionStatus assertion_status = AssertionStatus::Verified;
  std::string expected;  // display of the expected finding
  std::string found;     // display of what was reported
};

struct InjectionCampaignResult {
  CampaignConfig config;
  std::vector<InjectionRecord> records;
  std::size_t exact_finds = 0;
  std::size_t indirect_finds = 0;
  std::size_t wrong_finds = 0;
  std::size_t missed_finds = 0;
  std::size_t not_measurable = 0;
  std::size_t assertion_violations = 0;
  std::size_t search_failures = 0;
  /// Aggregates over measurable injections; absent when none were.
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> mean_evaluations;
};

/// Generates `count` single-blame projects, runs the full hierarchical
/// search on each (files, then symbols of every found file), and classifies
/// each outcome against the stored ground truth.
InjectionCampaignResult run_injection_campaign(const CampaignConfig& config);

}  // namespace sim
}  // namespace varisect
