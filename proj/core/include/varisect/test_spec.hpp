#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "varisect/comparator.hpp"
#include "varisect/value.hpp"

namespace varisect {

/// One user test: a name the test executable dispatches on, its input data,
/// and how its result is compared against the baseline. When inputs_per_run
/// is positive, default_input is split into chunks of that size and the test
/// runs once per chunk (data-driven testing); per-run results concatenate in
/// chunk order.
struct TestSpec {
  std::string name;
  std::size_t inputs_per_run = 0;
  std::vector<double> default_input;
  ResultKind result_kind = ResultKind::Scalar;
  Comparator comparator;

  /// Validates the chunking invariant; throws ConfigError.
  void validate() const;
  /// Input chunks, one per run. A spec with inputs_per_run == 0 has a single
  /// empty chunk.
  std::vector<std::vector<double>> input_chunks() const;
};

}  // namespace varisect
