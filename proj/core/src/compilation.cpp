#include "varisect/compilation.hpp"

#include <algorithm>

namespace varisect {

Compilation::Compilation(std::string compiler, std::string level,
                         std::vector<std::string> extra)
    : compiler_id(std::move(compiler)), optimization_level(std::move(level)) {
  // Deduplicate while preserving first-occurrence order; flag order can
  // matter to compilers, so no sorting.
  for (auto& sw : extra) {
    if (std::find(switches.begin(), switches.end(), sw) == switches.end()) {
      switches.push_back(std::move(sw));
    }
  }
}

std::string Compilation::display() const {
  std::string out = compiler_id;
  if (!optimization_level.empty()) {
    out += ' ';
    out += optimization_level;
  }
  for (const auto& sw : switches) {
    out += ' ';
    out += sw;
  }
  return out;
}

}  // namespace varisect
