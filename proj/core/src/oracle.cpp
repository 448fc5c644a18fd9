#include "varisect/oracle.hpp"

#include <algorithm>
#include <bit>

#include "varisect/errors.hpp"

namespace varisect {

namespace {

void check_cap(std::size_t size, const OracleOptions& options,
               const char* what) {
  if (size > options.max_universe || size >= 64) {
    throw ContractError(std::string(what) + " refused: universe size " +
                        std::to_string(size) + " exceeds brute-force cap " +
                        std::to_string(options.max_universe));
  }
}

ElementSet subset_of(const ElementSet& universe, std::uint64_t mask) {
  std::vector<Element> members;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (std::uint64_t{1} << i)) members.push_back(universe[i]);
  }
  return ElementSet(std::move(members));
}

}  // namespace

bool is_benign(const Element& x, const ElementSet& universe,
               MemoizedTest& test, const OracleOptions& options) {
  check_cap(universe.size(), options, "is_benign");
  std::size_t xi = universe.index_of(x);
  if (xi == ElementSet::npos) {
    throw ManifestError("is_benign: element not in universe: " + x.display());
  }
  // Subsets already containing x satisfy the condition trivially, so only
  // subsets of universe \ {x} need evaluation.
  std::uint64_t x_bit = std::uint64_t{1} << xi;
  std::uint64_t full = (std::uint64_t{1} << universe.size()) - 1;
  for (std::uint64_t mask = 0; mask <= full; ++mask) {
    if (mask & x_bit) continue;
    double without = test(subset_of(universe, mask)).value;
    double with = test(subset_of(universe, mask | x_bit)).value;
    if (without != with) return false;
  }
  return true;
}

ElementSet compute_av(const ElementSet& universe, MemoizedTest& test,
                      const OracleOptions& options) {
  check_cap(universe.size(), options, "compute_av");
  std::vector<Element> variable;
  for (const auto& e : universe) {
    if (!is_benign(e, universe, test, options)) variable.push_back(e);
  }
  return ElementSet(std::move(variable));
}

bool is_minimal_set(const ElementSet& candidate, const ElementSet& universe,
                    MemoizedTest& test, const OracleOptions& options) {
  check_cap(universe.size(), options, "is_minimal_set");
  for (const auto& e : candidate) {
    if (!universe.contains(e)) {
      throw ManifestError("is_minimal_set: candidate element not in universe: " +
                          e.display());
    }
  }
  if (!test(candidate).positive()) return false;
  std::size_t n = candidate.size();
  std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t mask = 0; mask < full; ++mask) {  // proper subsets only
    if (test(subset_of(candidate, mask)).value != 0.0) return false;
  }
  return true;
}

OracleVerdict oracle_verdict(const ElementSet& universe, MemoizedTest& test,
                             const OracleOptions& options) {
  check_cap(universe.size(), options, "oracle_verdict");
  OracleVerdict verdict;
  verdict.av_set = compute_av(universe, test, options);

  double whole = test(universe).value;
  std::size_t n = universe.size();
  std::uint64_t full = (std::uint64_t{1} << n) - 1;

  // Gather subsets scoring exactly like the whole universe, in increasing
  // popcount order. A set is minimal iff it scores like the universe and no
  // previously found minimal set is a proper subset of it (any smaller
  // matching subset would contain one).
  std::vector<std::uint64_t> matching;
  for (std::uint64_t mask = 0; mask <= full; ++mask) {
    if (test(subset_of(universe, mask)).value == whole) matching.push_back(mask);
  }
  std::stable_sort(matching.begin(), matching.end(),
                   [](std::uint64_t a, std::uint64_t b) {
                     return std::popcount(a) < std::popcount(b);
                   });
  std::vector<std::uint64_t> minimal_masks;
  for (std::uint64_t mask : matching) {
    bool has_smaller = false;
    for (std::uint64_t m : minimal_masks) {
      if ((m & mask) == m && m != mask) {
        has_smaller = true;
        break;
      }
    }
    if (!has_smaller) minimal_masks.push_back(mask);
  }
  for (std::uint64_t mask : minimal_masks) {
    verdict.minimal_sets.push_back(subset_of(universe, mask));
  }
  verdict.unique_minimal = verdict.minimal_sets.size() == 1;
  return verdict;
}

}  // namespace varisect
