#pragma once

#include <string>
#include <vector>

namespace varisect {

/// Identity of one way to build a translation unit: which compiler, at which
/// optimization level, with which extra switches. The triple is the identity;
/// two compilations are interchangeable only if all three parts match.
struct Compilation {
  std::string compiler_id;            // key into the compiler configuration
  std::string optimization_level;     // e.g. "-O2", or a vendor-specific level
  std::vector<std::string> switches;  // duplicate-free, order preserved

  Compilation() = default;
  Compilation(std::string compiler, std::string level,
              std::vector<std::string> extra = {});

  bool operator==(const Compilation& other) const = default;

  /// Human-readable form, e.g. "gxx -O3 -ffast-math". Also used as the
  /// stable cell identifier in sweep records and CSV series.
  std::string display() const;
};

}  // namespace varisect
