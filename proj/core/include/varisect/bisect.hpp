#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "varisect/element.hpp"
#include "varisect/testfn.hpp"

namespace varisect {

enum class AssertionStatus { Verified, Violated, Skipped };
enum class Assumption { UniqueError, SingletonBlame };

const char* to_string(AssertionStatus status);
const char* to_string(Assumption assumption);

/// One located element together with the score its singleton set produces.
struct Finding {
  Element element;
  double score = 0.0;
};

/// Search effort on one hierarchy level (the file level, or the symbols of
/// one file).
struct SearchLevel {
  std::string label;
  std::size_t universe_size = 0;
  std::size_t found_count = 0;
  std::size_t distinct_evaluations = 0;
};

struct BisectReport {
  /// Elements proven to induce variability on their own, sorted by
  /// descending individual score (ties in canonical order). Every entry has
  /// Test({element}) > 0 by construction; false positives are impossible.
  std::vector<Finding> found;
  std::size_t search_space_size = 0;
  std::size_t distinct_evaluations = 0;
  std::size_t total_calls = 0;
  /// Verified: the dynamic-verification assertions all held, so under the
  /// unique-error assumption the found set is complete. Violated: an
  /// assertion failed and false negatives are possible. Skipped: the search
  /// variant cannot verify (its found list is incomplete by design).
  AssertionStatus assertion_status = AssertionStatus::Verified;
  /// Which assumptions could explain a Violated status. The final
  /// whole-vs-found assertion cannot distinguish the two candidates, so both
  /// are listed for it.
  std::vector<Assumption> violated_assumptions;
  /// Set when score evidence contradicted the file-dominance assumption the
  /// early-exit search relies on (a symbol outscored its file); results may
  /// be missing entries beyond the requested k.
  bool possible_false_negatives = false;
  /// Files whose variability could not be attributed below file level (the
  /// position-independence rebuild removed it, or no exported symbols).
  std::vector<Element> file_level_only;
  /// Per-level effort; empty for the early-exit search, whose frontier does
  /// not decompose by level.
  std::vector<SearchLevel> levels;
};

/// First floor(n/2) elements and the remainder, in set order. The fixed
/// split point makes traces and invocation counts reproducible.
/// Requires size >= 2.
std::pair<ElementSet, ElementSet> split_in_half(const ElementSet& items);

/// Locates one variability-inducing element in `items` by divide and
/// conquer. Returns (discard, found): `found` is a singleton whose own score
/// is positive; `discard` additionally contains elements ruled out alongside
/// it (subsets that scored zero while the search descended the other half).
/// Caller guarantees test(items) > 0.
///
/// Throws SingletonBlameViolation when the descent bottoms out on a
/// zero-scoring singleton, which can only happen when elements misbehave
/// jointly (the singleton-blame assumption fails).
std::pair<ElementSet, ElementSet> bisect_one(MemoizedTest& test,
                                             const ElementSet& items);

class SingletonBlameViolation : public Error {
 public:
  explicit SingletonBlameViolation(const Element& element)
      : Error("singleton scored zero at the base case: " + element.display()),
        element_(element) {}
  const Element& element() const { return element_; }

 private:
  Element element_;
};

struct BisectOptions {
  ScoreEq score_eq;  // equality used by the dynamic-verification assertion
};

/// Finds every element of `items` that induces variability on its own,
/// repeatedly extracting one element and shrinking the search space. After
/// the loop, re-tests the full set against the found set; a mismatch means
/// one of the two core assumptions does not hold on this instance, and the
/// report says so instead of silently returning an incomplete answer.
BisectReport bisect_all(MemoizedTest& test, const ElementSet& items,
                        const BisectOptions& options = {});

/// Symbol-level search context for one found file: the exported-symbol
/// universe and the test evaluating symbol subsets of that file. When
/// `file_level_only` is set the search cannot go below file granularity.
struct SymbolSearch {
  ElementSet universe;
  std::shared_ptr<MemoizedTest> test;
  bool file_level_only = false;
};

using SymbolProvider = std::function<SymbolSearch(const Element& file)>;

/// Best-first search for the k biggest contributors, over files first and,
/// immediately upon isolating a file, its symbols. Frontiers are
/// max-priority queues of (score, subset); a popped subset whose score is
/// <= the k-th best symbol score found so far ends its frontier. Equal
/// scores pop in insertion order. Cannot dynamically verify completeness
/// (assertion_status is Skipped); may return more than k symbols when they
/// are discovered before the cutoff takes effect.
BisectReport bisect_biggest_k(MemoizedTest& file_test,
                              const ElementSet& all_files, std::size_t k,
                              const SymbolProvider& symbols_of);

struct HierarchicalOptions {
  std::optional<std::size_t> k;  // set: biggest-k search instead of full
  bool files_only = false;
  ScoreEq score_eq;
};

/// The dual-level search: file-level bisection, then symbol-level bisection
/// inside every found file (or the early-exit biggest-k variant when k is
/// given). The returned report merges file and symbol findings; evaluation
/// counters sum both levels.
BisectReport hierarchical_bisect(MemoizedTest& file_test,
                                 const ElementSet& all_files,
                                 const SymbolProvider& symbols_of,
                                 const HierarchicalOptions& options = {});

}  // namespace varisect
