#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <unordered_map>

#include "varisect/element.hpp"
#include "varisect/errors.hpp"
#include "varisect/score.hpp"

namespace varisect {

/// Raised when a Test evaluation comes back as a build or run failure. The
/// current bisection cannot continue past it; callers surface it as a
/// structured failure, never as a variability signal.
class TestFailure : public Error {
 public:
  TestFailure(TestScore score, std::string set_display)
      : Error("test evaluation failed (" + std::string(to_string(score.meta)) +
              ") on {" + set_display + "}: " + score.diagnostics),
        score_(std::move(score)),
        set_display_(std::move(set_display)) {}

  const TestScore& score() const { return score_; }
  const std::string& set_display() const { return set_display_; }

 private:
  TestScore score_;
  std::string set_display_;
};

/// The Test metric handed to the search algorithms: maps an element set to a
/// non-negative score, zero meaning no observable variability. Wraps a
/// backend callable with memoization keyed on set identity, so repeated
/// evaluations of the same set never redo backend work, and the search
/// algorithms see a deterministic function. The empty set is always 0 and
/// costs nothing.
class MemoizedTest {
 public:
  using Backend = std::function<TestScore(const ElementSet&)>;

  explicit MemoizedTest(Backend backend) : backend_(std::move(backend)) {}

  /// Evaluates (or recalls) the score. Throws TestFailure when the backend
  /// reported a build or run failure for this set.
  const TestScore& operator()(const ElementSet& set);

  /// Like operator(), but returns failure scores instead of throwing.
  const TestScore& evaluate(const ElementSet& set);

  /// Backend invocations (cache misses, measured or failed).
  std::size_t distinct_evaluations() const { return distinct_; }
  /// All calls, including cache hits and empty-set shortcuts.
  std::size_t total_calls() const { return total_; }

 private:
  Backend backend_;
  std::unordered_map<std::string, TestScore> memo_;
  std::size_t distinct_ = 0;
  std::size_t total_ = 0;
  TestScore empty_score_ = TestScore::measured_value(0.0);
};

}  // namespace varisect
