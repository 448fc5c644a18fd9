#pragma once

#include <optional>
#include <string>

#include "varisect/score.hpp"
#include "varisect/value.hpp"

namespace varisect {

enum class ComparatorKind { AbsDiff, L2Diff, RelL2Diff, ExactText };

/// Baseline-vs-candidate metric. Always non-negative; exactly zero when the
/// operands are identical after optional significant-digit truncation.
/// Not required to be symmetric: RelL2Diff normalizes by the baseline norm.
struct Comparator {
  ComparatorKind kind = ComparatorKind::AbsDiff;
  /// When set, both operands are rounded to this many significant decimal
  /// digits (per numeric component) before comparing.
  std::optional<int> digits;
};

/// Computes the comparison score. Kind or length mismatches between the two
/// values, and a zero baseline norm under RelL2Diff with a nonzero
/// difference, yield a RunFailure score (a comparison error, never a
/// variability signal).
TestScore compare_values(const TestValue& baseline, const TestValue& candidate,
                         const Comparator& cmp);

/// Rounds to `digits` significant decimal digits via decimal formatting.
double round_significant(double v, int digits);

const char* to_string(ComparatorKind kind);
ComparatorKind comparator_kind_from_string(const std::string& name);

}  // namespace varisect
