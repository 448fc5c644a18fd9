#pragma once

#include <cmath>
#include <string>

namespace varisect {

enum class ScoreMeta { Measured, BuildFailure, RunFailure };

/// Result of one Test evaluation: a non-negative variability magnitude, or a
/// failure marker. A failure is never interpreted as "reproducible"; code that
/// needs a number must check `measured()` first.
struct TestScore {
  double value = 0.0;
  ScoreMeta meta = ScoreMeta::Measured;
  std::string diagnostics;  // failure detail, empty when measured

  static TestScore measured_value(double v) {
    return TestScore{v, ScoreMeta::Measured, {}};
  }
  static TestScore build_failure(std::string detail) {
    return TestScore{0.0, ScoreMeta::BuildFailure, std::move(detail)};
  }
  static TestScore run_failure(std::string detail) {
    return TestScore{0.0, ScoreMeta::RunFailure, std::move(detail)};
  }

  bool measured() const { return meta == ScoreMeta::Measured; }
  bool failed() const { return meta != ScoreMeta::Measured; }
  bool positive() const { return measured() && value > 0.0; }
  bool zero() const { return measured() && value == 0.0; }
};

/// Equality of two measured score magnitudes. The dynamic-verification
/// assertions reason about exact magnitude matches, so the default epsilon
/// is zero (exact comparison); a tolerance can be configured.
struct ScoreEq {
  double epsilon = 0.0;
  bool operator()(double a, double b) const {
    if (epsilon == 0.0) return a == b;
    return std::fabs(a - b) <= epsilon;
  }
};

const char* to_string(ScoreMeta meta);

}  // namespace varisect
