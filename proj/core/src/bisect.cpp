#include "varisect/bisect.hpp"

#include <algorithm>
#include <queue>

#include "varisect/errors.hpp"

namespace varisect {

const char* to_string(AssertionStatus status) {
  switch (status) {
    case AssertionStatus::Verified: return "Verified";
    case AssertionStatus::Violated: return "Violated";
    case AssertionStatus::Skipped: return "Skipped";
  }
  return "?";
}

const char* to_string(Assumption assumption) {
  switch (assumption) {
    case Assumption::UniqueError: return "UniqueError";
    case Assumption::SingletonBlame: return "SingletonBlame";
  }
  return "?";
}

std::pair<ElementSet, ElementSet> split_in_half(const ElementSet& items) {
  if (items.size() < 2) {
    throw ContractError("split_in_half requires at least 2 elements, got " +
                        std::to_string(items.size()));
  }
  std::size_t half = items.size() / 2;
  std::vector<Element> first(items.begin(), items.begin() + half);
  std::vector<Element> second(items.begin() + half, items.end());
  return {ElementSet(std::move(first)), ElementSet(std::move(second))};
}

std::pair<ElementSet, ElementSet> bisect_one(MemoizedTest& test,
                                             const ElementSet& items) {
  if (items.empty()) throw ContractError("bisect_one on empty set");
  if (items.size() == 1) {
    // Base case: this element alone must reproduce a positive score,
    // otherwise the blame is not attributable to any single element.
    if (!test(items).positive()) throw SingletonBlameViolation(items[0]);
    return {items, items};
  }
  auto [first_half, second_half] = split_in_half(items);
  if (test(first_half).positive()) {
    return bisect_one(test, first_half);
  }
  auto [discard, found] = bisect_one(test, second_half);
  // The zero-scoring first half precedes the recursive discard set in
  // canonical order, so plain concatenation keeps the order canonical.
  return {first_half.concat(discard), found};
}

namespace {

void sort_findings(std::vector<Finding>& findings,
                   const std::function<std::pair<std::size_t, std::size_t>(
                       const Element&)>& rank) {
  std::stable_sort(findings.begin(), findings.end(),
                   [&](const Finding& a, const Finding& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return rank(a.element) < rank(b.element);
                   });
}

}  // namespace

BisectReport bisect_all(MemoizedTest& test, const ElementSet& items,
                        const BisectOptions& options) {
  if (items.empty()) throw ContractError("bisect_all on empty set");
  BisectReport report;
  report.search_space_size = items.size();
  std::size_t distinct_before = test.distinct_evaluations();
  std::size_t calls_before = test.total_calls();

  std::vector<Element> found_elements;
  ElementSet remaining = items;
  bool violated = false;
  try {
    while (test(remaining).positive()) {
      auto [discard, next] = bisect_one(test, remaining);
      found_elements.push_back(next[0]);
      remaining = remaining.difference(discard);
    }
    // Dynamic verification: the found elements alone must reproduce the
    // magnitude of the whole set. Test(items) is already memoized from the
    // first loop check.
    double whole = test(items).value;
    double isolated = test(ElementSet(found_elements)).value;
    if (!options.score_eq(whole, isolated)) {
      violated = true;
      // A mismatch here does not identify which assumption failed; either
      // colliding magnitudes or joint-only blame can produce it.
      report.violated_assumptions = {Assumption::UniqueError,
                                     Assumption::SingletonBlame};
    }
  } catch (const SingletonBlameViolation&) {
    violated = true;
    report.violated_assumptions = {Assumption::SingletonBlame};
  }

  report.assertion_status =
      violated ? AssertionStatus::Violated : AssertionStatus::Verified;
  report.possible_false_negatives = violated;

  for (const auto& e : found_elements) {
    // The singleton evaluation is memoized from the base case.
    report.found.push_back(Finding{e, test(ElementSet{e}).value});
  }
  sort_findings(report.found, [&](const Element& e) {
    return std::make_pair(items.index_of(e), std::size_t{0});
  });

  report.distinct_evaluations = test.distinct_evaluations() - distinct_before;
  report.total_calls = test.total_calls() - calls_before;
  report.levels.push_back(SearchLevel{"", items.size(), report.found.size(),
                                      report.distinct_evaluations});
  return report;
}

namespace {

struct FrontierEntry {
  double score;
  std::uint64_t seq;  // insertion order; earlier entries win score ties
  ElementSet set;
};

struct FrontierOrder {
  bool operator()(const FrontierEntry& a, const FrontierEntry& b) const {
    if (a.score != b.score) return a.score < b.score;
    return a.seq > b.seq;
  }
};

using Frontier =
    std::priority_queue<FrontierEntry, std::vector<FrontierEntry>,
                        FrontierOrder>;

}  // namespace

BisectReport bisect_biggest_k(MemoizedTest& file_test,
                              const ElementSet& all_files, std::size_t k,
                              const SymbolProvider& symbols_of) {
  if (k < 1) throw ContractError("bisect_biggest_k requires k >= 1");
  BisectReport report;
  report.assertion_status = AssertionStatus::Skipped;
  report.search_space_size = all_files.size();
  std::size_t distinct_before = file_test.distinct_evaluations();
  std::size_t calls_before = file_test.total_calls();
  std::size_t symbol_distinct = 0;
  std::size_t symbol_calls = 0;

  std::vector<Finding> found_files;
  std::vector<Finding> found_symbols;  // kept sorted by descending score
  std::vector<std::pair<std::size_t, std::size_t>> symbol_rank;
  std::uint64_t seq = 0;
  double kth_score = 0.0;

  Frontier file_frontier;
  file_frontier.push({file_test(all_files).value, seq++, all_files});

  while (!file_frontier.empty()) {
    FrontierEntry entry = file_frontier.top();
    file_frontier.pop();
    if (entry.score <= kth_score) break;
    if (entry.set.size() != 1) {
      auto [first_half, second_half] = split_in_half(entry.set);
      file_frontier.push({file_test(first_half).value, seq++, first_half});
      file_frontier.push({file_test(second_half).value, seq++, second_half});
      continue;
    }

    const Element& file = entry.set[0];
    std::size_t file_ordinal = all_files.index_of(file);
    found_files.push_back(Finding{file, entry.score});

    // Search this file's symbols immediately; symbol scores raise the
    // cutoff for everything still on the file frontier.
    SymbolSearch search = symbols_of(file);
    if (search.file_level_only || search.universe.empty() || !search.test) {
      report.file_level_only.push_back(file);
      continue;
    }
    MemoizedTest& sym_test = *search.test;
    Frontier sym_frontier;
    double universe_score = sym_test(search.universe).value;
    sym_frontier.push({universe_score, seq++, search.universe});
    bool any_symbol_found = false;
    while (!sym_frontier.empty()) {
      FrontierEntry sym_entry = sym_frontier.top();
      sym_frontier.pop();
      if (sym_entry.score <= kth_score) break;
      if (sym_entry.set.size() == 1) {
        any_symbol_found = true;
        if (sym_entry.score > entry.score) {
          // A symbol outscored its file: the file-dominance assumption the
          // early exit relies on does not hold on this instance.
          report.possible_false_negatives = true;
        }
        found_symbols.push_back(Finding{sym_entry.set[0], sym_entry.score});
        symbol_rank.emplace_back(
            file_ordinal, 1 + search.universe.index_of(sym_entry.set[0]));
        // Keep the list ordered so the k-th best is addressable.
        for (std::size_t i = found_symbols.size(); i-- > 1;) {
          if (found_symbols[i].score > found_symbols[i - 1].score) {
            std::swap(found_symbols[i], found_symbols[i - 1]);
            std::swap(symbol_rank[i], symbol_rank[i - 1]);
          } else {
            break;
          }
        }
        if (found_symbols.size() >= k) kth_score = found_symbols[k - 1].score;
      } else {
        auto [first_half, second_half] = split_in_half(sym_entry.set);
        sym_frontier.push({sym_test(first_half).value, seq++, first_half});
        sym_frontier.push({sym_test(second_half).value, seq++, second_half});
      }
    }
    if (!any_symbol_found && universe_score == 0.0) {
      report.file_level_only.push_back(file);
    }
    symbol_distinct += sym_test.distinct_evaluations();
    symbol_calls += sym_test.total_calls();
  }

  report.found = std::move(found_files);
  std::vector<std::pair<std::size_t, std::size_t>> rank_of;
  for (auto& f : report.found) {
    rank_of.emplace_back(all_files.index_of(f.element), 0);
  }
  for (std::size_t i = 0; i < found_symbols.size(); ++i) {
    report.found.push_back(found_symbols[i]);
    rank_of.push_back(symbol_rank[i]);
  }
  // Sort merged findings by descending score; ties follow canonical order
  // (file position, then symbol position within the file).
  std::vector<std::size_t> order(report.found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    if (report.found[a].score != report.found[b].score) {
      return report.found[a].score > report.found[b].score;
    }
    return rank_of[a] < rank_of[b];
  });
  std::vector<Finding> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : order) sorted.push_back(report.found[i]);
  report.found = std::move(sorted);

  report.distinct_evaluations =
      file_test.distinct_evaluations() - distinct_before + symbol_distinct;
  report.total_calls = file_test.total_calls() - calls_before + symbol_calls;
  return report;
}

BisectReport hierarchical_bisect(MemoizedTest& file_test,
                                 const ElementSet& all_files,
                                 const SymbolProvider& symbols_of,
                                 const HierarchicalOptions& options) {
  if (options.k) {
    return bisect_biggest_k(file_test, all_files, *options.k, symbols_of);
  }

  BisectOptions bisect_options{options.score_eq};
  BisectReport file_report = bisect_all(file_test, all_files, bisect_options);

  BisectReport merged;
  merged.search_space_size = file_report.search_space_size;
  merged.distinct_evaluations = file_report.distinct_evaluations;
  merged.total_calls = file_report.total_calls;
  merged.assertion_status = file_report.assertion_status;
  merged.violated_assumptions = file_report.violated_assumptions;
  merged.possible_false_negatives = file_report.possible_false_negatives;
  merged.levels.push_back(SearchLevel{"files", all_files.size(),
                                      file_report.found.size(),
                                      file_report.distinct_evaluations});

  std::vector<std::pair<std::size_t, std::size_t>> rank_of;
  for (const auto& finding : file_report.found) {
    merged.found.push_back(finding);
    rank_of.emplace_back(all_files.index_of(finding.element), 0);
  }

  if (!options.files_only) {
    for (const auto& finding : file_report.found) {
      const Element& file = finding.element;
      std::size_t file_ordinal = all_files.index_of(file);
      SymbolSearch search = symbols_of(file);
      if (search.file_level_only || search.universe.empty() || !search.test) {
        if (search.test) {
          // The provider may have spent evaluations deciding the file is
          // not searchable below file level; keep them on the books.
          merged.distinct_evaluations += search.test->distinct_evaluations();
          merged.total_calls += search.test->total_calls();
        }
        merged.file_level_only.push_back(file);
        continue;
      }
      BisectReport sym_report =
          bisect_all(*search.test, search.universe, bisect_options);
      // The provider hands out a fresh test per file and may have evaluated
      // the full symbol set already (the fallback pre-check), so totals are
      // the honest execution count for this level.
      std::size_t sym_evals = search.test->distinct_evaluations();
      merged.distinct_evaluations += sym_evals;
      merged.total_calls += search.test->total_calls();
      merged.search_space_size += sym_report.search_space_size;
      merged.levels.push_back(SearchLevel{"symbols of " + file.display(),
                                          search.universe.size(),
                                          sym_report.found.size(), sym_evals});
      if (sym_report.assertion_status == AssertionStatus::Violated) {
        merged.assertion_status = AssertionStatus::Violated;
        merged.possible_false_negatives = true;
        for (auto a : sym_report.violated_assumptions) {
          if (std::find(merged.violated_assumptions.begin(),
                        merged.violated_assumptions.end(),
                        a) == merged.violated_assumptions.end()) {
            merged.violated_assumptions.push_back(a);
          }
        }
      }
      if (sym_report.found.empty()) {
        // Symbols do not explain the file's variability (for the real
        // toolchain this is the position-independence fallback).
        merged.file_level_only.push_back(file);
        continue;
      }
      for (const auto& sym_finding : sym_report.found) {
        merged.found.push_back(sym_finding);
        rank_of.emplace_back(
            file_ordinal, 1 + search.universe.index_of(sym_finding.element));
      }
    }
  }

  std::vector<std::size_t> order(merged.found.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     if (merged.found[a].score != merged.found[b].score) {
                       return merged.found[a].score > merged.found[b].score;
                     }
                     return rank_of[a] < rank_of[b];
                   });
  std::vector<Finding> sorted;
  sorted.reserve(order.size());
  for (std::size_t i : order) sorted.push_back(merged.found[i]);
  merged.found = std::move(sorted);
  return merged;
}

}  // namespace varisect
