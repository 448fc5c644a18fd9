#pragma once

#include <cstddef>
#include <vector>

#include "varisect/element.hpp"
#include "varisect/testfn.hpp"

namespace varisect {

/// Exhaustive ground truth for small instances, by direct evaluation of the
/// definitions over every subset. Used by tests and a debugging CLI verb,
/// never by the search path: the subset count is exponential, so each
/// operation refuses universes larger than `max_universe`.
struct OracleOptions {
  std::size_t max_universe = 12;
};

/// True iff adding `x` never changes the score of any subset of `universe`
/// (the element has no effect at all). Enumerates all subsets.
bool is_benign(const Element& x, const ElementSet& universe,
               MemoizedTest& test, const OracleOptions& options = {});

/// The universe minus its benign elements: the smallest set that fully
/// explains the universe's score.
ElementSet compute_av(const ElementSet& universe, MemoizedTest& test,
                      const OracleOptions& options = {});

/// True iff `candidate` scores positive while every proper subset scores
/// zero.
bool is_minimal_set(const ElementSet& candidate, const ElementSet& universe,
                    MemoizedTest& test, const OracleOptions& options = {});

struct OracleVerdict {
  ElementSet av_set;
  /// Minimal sets under the derived boolean test "scores exactly like the
  /// whole universe": members score like the universe while none of their
  /// proper subsets do.
  std::vector<ElementSet> minimal_sets;
  bool unique_minimal = false;
};

/// Full verdict: the all-variable set plus the minimal sets of the derived
/// boolean test. When errors from different element sets never collide in
/// magnitude, the all-variable set is the unique minimal set.
OracleVerdict oracle_verdict(const ElementSet& universe, MemoizedTest& test,
                             const OracleOptions& options = {});

}  // namespace varisect
