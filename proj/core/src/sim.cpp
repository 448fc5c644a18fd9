#include "varisect/sim.hpp"

#include <algorithm>
#include <cstdio>
#include <random>
#include <unordered_set>

#include "varisect/errors.hpp"

namespace varisect {
namespace sim {

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::Independent: return "independent";
    case Mode::Coupled: return "coupled";
    case Mode::ZeroMagnitude: return "zero-magnitude";
    case Mode::NonExported: return "non-exported";
  }
  return "?";
}

Mode mode_from_string(const std::string& name) {
  if (name == "independent") return Mode::Independent;
  if (name == "coupled") return Mode::Coupled;
  if (name == "zero-magnitude") return Mode::ZeroMagnitude;
  if (name == "non-exported") return Mode::NonExported;
  throw ConfigError("unknown injection mode: " + name);
}

const char* to_string(InjectionOutcome outcome) {
  switch (outcome) {
    case InjectionOutcome::ExactFind: return "exact finds";
    case InjectionOutcome::IndirectFind: return "indirect finds";
    case InjectionOutcome::WrongFind: return "wrong finds";
    case InjectionOutcome::MissedFind: return "missed finds";
    case InjectionOutcome::NotMeasurable: return "not measurable";
  }
  return "?";
}

namespace {

std::string file_name(std::size_t i) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "f%03zu.cpp", i);
  return buf;
}

std::string symbol_name(std::size_t file, std::size_t sym) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "f%03zu_s%03zu", file, sym);
  return buf;
}

}  // namespace

Element SyntheticProject::file_element(std::size_t file_index) const {
  return Element::file_of(files.at(file_index));
}

Element SyntheticProject::symbol_element(std::size_t file_index,
                                         std::size_t sym_index) const {
  return Element::symbol_of(files.at(file_index),
                            symbols.at(file_index).at(sym_index),
                            symbol_exported.at(file_index).at(sym_index));
}

ElementSet SyntheticProject::file_universe() const {
  std::vector<Element> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(Element::file_of(f));
  return ElementSet(std::move(out));
}

ElementSet SyntheticProject::exported_symbols_of(const Element& file) const {
  auto it = std::find(files.begin(), files.end(), file.file);
  if (it == files.end()) {
    throw ManifestError("no such file in synthetic project: " + file.file);
  }
  std::size_t fi = static_cast<std::size_t>(it - files.begin());
  std::vector<Element> out;
  for (std::size_t si = 0; si < symbols[fi].size(); ++si) {
    if (symbol_exported[fi][si]) out.push_back(symbol_element(fi, si));
  }
  return ElementSet(std::move(out));
}

std::vector<Element> SyntheticProject::expected_findings() const {
  std::vector<Element> out;
  auto add = [&](const Element& e) {
    if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(e);
  };
  for (const auto& inj : injections) {
    if (inj.magnitude == 0.0) continue;
    add(Element::file_of(inj.site.file));
    if (inj.site.exported) {
      add(inj.site);
    } else if (inj.caller) {
      add(*inj.caller);
    }
  }
  for (const auto& pair : coupling) {
    if (pair.magnitude == 0.0) continue;
    add(Element::file_of(pair.first.file));
    add(Element::file_of(pair.second.file));
    add(pair.first);
    add(pair.second);
  }
  return out;
}

SyntheticProject generate_project(std::uint64_t seed, std::size_t n_files,
                                  std::size_t symbols_per_file,
                                  std::size_t n_injections, Mode mode) {
  if (n_files == 0 || symbols_per_file == 0) {
    throw ContractError("synthetic project needs at least one file and one "
                        "symbol per file");
  }
  std::size_t total = n_files * symbols_per_file;
  std::size_t sites_needed =
      mode == Mode::Coupled ? 2 * n_injections : n_injections;
  if (sites_needed > total) {
    throw ContractError("not enough symbols for " +
                        std::to_string(n_injections) + " injections");
  }

  SyntheticProject project;
  project.seed = seed;
  project.files.reserve(n_files);
  for (std::size_t fi = 0; fi < n_files; ++fi) {
    project.files.push_back(file_name(fi));
    std::vector<std::string> syms;
    for (std::size_t si = 0; si < symbols_per_file; ++si) {
      syms.push_back(symbol_name(fi, si));
    }
    project.symbols.push_back(std::move(syms));
    project.symbol_exported.emplace_back(symbols_per_file, true);
  }

  // Draw distinct sites with a partial Fisher-Yates over flat indices. Only
  // engine outputs are used (mt19937_64 output is pinned by the standard),
  // so the same seed yields the same project everywhere.
  std::mt19937_64 engine(seed);
  std::vector<std::size_t> indices(total);
  for (std::size_t i = 0; i < total; ++i) indices[i] = i;
  std::vector<std::size_t> sites;
  for (std::size_t i = 0; i < sites_needed; ++i) {
    std::size_t j = i + static_cast<std::size_t>(engine() % (total - i));
    std::swap(indices[i], indices[j]);
    sites.push_back(indices[i]);
  }

  auto site_element = [&](std::size_t flat) {
    return project.symbol_element(flat / symbols_per_file,
                                  flat % symbols_per_file);
  };

  if (mode == Mode::Coupled) {
    for (std::size_t p = 0; p < n_injections; ++p) {
      CoupledPair pair;
      pair.first = site_element(sites[2 * p]);
      pair.second = site_element(sites[2 * p + 1]);
      pair.magnitude = std::ldexp(1.0, -static_cast<int>(p + 1));
      project.coupling.push_back(std::move(pair));
    }
    return project;
  }

  for (std::size_t i = 0; i < n_injections; ++i) {
    Injection inj;
    std::size_t fi = sites[i] / symbols_per_file;
    std::size_t si = sites[i] % symbols_per_file;
    inj.magnitude = mode == Mode::ZeroMagnitude
                        ? 0.0
                        : std::ldexp(1.0, -static_cast<int>(i + 1));
    if (mode == Mode::NonExported) {
      project.symbol_exported[fi][si] = false;
      inj.site = project.symbol_element(fi, si);
      for (std::size_t other = 0; other < symbols_per_file; ++other) {
        if (project.symbol_exported[fi][other]) {
          inj.caller = project.symbol_element(fi, other);
          break;
        }
      }
    } else {
      inj.site = project.symbol_element(fi, si);
    }
    project.injections.push_back(std::move(inj));
  }
  return project;
}

namespace {

double file_level_score(const SyntheticProject& project,
                        const ElementSet& file_set) {
  std::unordered_set<std::string> present;
  for (const auto& e : file_set) {
    if (e.kind != ElementKind::File) {
      throw ContractError("file-granularity test got a symbol element: " +
                          e.display());
    }
    present.insert(e.file);
  }
  double scale = project.sub_file_cancellation ? 0.25 : 1.0;
  double score = 0.0;
  for (const auto& inj : project.injections) {
    if (present.count(inj.site.file)) score += scale * inj.magnitude;
  }
  for (const auto& pair : project.coupling) {
    if (present.count(pair.first.file) && present.count(pair.second.file)) {
      score += scale * pair.magnitude;
    }
  }
  return score;
}

double symbol_level_score(const SyntheticProject& project,
                          const std::string& file,
                          const ElementSet& symbol_set) {
  std::unordered_set<std::string> present;
  for (const auto& e : symbol_set) {
    if (e.kind != ElementKind::Symbol || e.file != file) {
      throw ContractError(
          "symbol-granularity test got a foreign element: " + e.display());
    }
    present.insert(e.symbol);
  }
  double score = 0.0;
  for (const auto& inj : project.injections) {
    if (inj.site.file != file) continue;
    if (inj.site.exported) {
      if (present.count(inj.site.symbol)) score += inj.magnitude;
    } else if (inj.caller && present.count(inj.caller->symbol)) {
      // The hidden symbol travels with its caller when only this file's
      // symbols are swapped in.
      score += inj.magnitude;
    }
  }
  for (const auto& pair : project.coupling) {
    if (pair.first.file == file && pair.second.file == file &&
        present.count(pair.first.symbol) && present.count(pair.second.symbol)) {
      score += pair.magnitude;
    }
  }
  return score;
}

}  // namespace

MemoizedTest make_file_test(const SyntheticProject& project) {
  return MemoizedTest([&project](const ElementSet& set) {
    return TestScore::measured_value(file_level_score(project, set));
  });
}

MemoizedTest make_symbol_test(const SyntheticProject& project,
                              const Element& file) {
  std::string file_path = file.file;
  return MemoizedTest([&project, file_path](const ElementSet& set) {
    return TestScore::measured_value(
        symbol_level_score(project, file_path, set));
  });
}

SymbolProvider symbol_provider(const SyntheticProject& project) {
  return [&project](const Element& file) {
    SymbolSearch search;
    search.universe = project.exported_symbols_of(file);
    search.test = std::make_shared<MemoizedTest>(
        make_symbol_test(project, file));
    return search;
  };
}

namespace {

InjectionOutcome classify(const SyntheticProject& project,
                          const BisectReport& report) {
  const Injection& inj = project.injections.at(0);
  std::vector<Element> files_found;
  std::vector<Element> symbols_found;
  for (const auto& finding : report.found) {
    if (finding.element.kind == ElementKind::File) {
      files_found.push_back(finding.element);
    } else {
      symbols_found.push_back(finding.element);
    }
  }

  Element expected_file = Element::file_of(inj.site.file);
  for (const auto& f : files_found) {
    if (!(f == expected_file)) return InjectionOutcome::WrongFind;
  }
  for (const auto& s : symbols_found) {
    bool is_site = inj.site.exported && s == inj.site;
    bool is_caller = inj.caller && s == *inj.caller;
    if (!is_site && !is_caller) return InjectionOutcome::WrongFind;
  }

  bool file_hit = std::find(files_found.begin(), files_found.end(),
                            expected_file) != files_found.end();
  if (!file_hit) return InjectionOutcome::MissedFind;

  if (inj.site.exported) {
    bool symbol_hit = std::find(symbols_found.begin(), symbols_found.end(),
                                inj.site) != symbols_found.end();
    return symbol_hit ? InjectionOutcome::ExactFind
                      : InjectionOutcome::MissedFind;
  }
  // Hidden site: the file (plus the caller, when one exists) is the best
  // possible answer.
  if (inj.caller) {
    bool caller_hit = std::find(symbols_found.begin(), symbols_found.end(),
                                *inj.caller) != symbols_found.end();
    return caller_hit ? InjectionOutcome::IndirectFind
                      : InjectionOutcome::MissedFind;
  }
  return InjectionOutcome::IndirectFind;
}

std::string display_elements(const std::vector<Element>& elements) {
  std::string out;
  for (std::size_t i = 0; i < elements.size(); ++i) {
    if (i) out += ", ";
    out += elements[i].display();
  }
  return out;
}

}  // namespace

InjectionCampaignResult run_injection_campaign(const CampaignConfig& config) {
  InjectionCampaignResult result;
  result.config = config;
  std::size_t measurable = 0;
  std::size_t true_positives = 0;
  double evaluation_sum = 0.0;

  for (std::size_t i = 0; i < config.count; ++i) {
    InjectionRecord record;
    record.instance_seed = config.seed + i;
    SyntheticProject project =
        generate_project(record.instance_seed, config.n_files,
                         config.symbols_per_file, 1, config.mode);
    record.expected = display_elements(project.expected_findings());

    MemoizedTest file_test = make_file_test(project);
    HierarchicalOptions options;
    options.k = config.k;
    try {
      BisectReport report = hierarchical_bisect(
          file_test, project.file_universe(), symbol_provider(project),
          options);
      record.distinct_evaluations = report.distinct_evaluations;
      record.levels = report.levels;
      record.assertion_status = report.assertion_status;
      if (report.assertion_status == AssertionStatus::Violated) {
        ++result.assertion_violations;
      }
      std::vector<Element> found;
      for (const auto& finding : report.found) found.push_back(finding.element);
      record.found = display_elements(found);

      bool is_measurable = !file_test.evaluate(project.file_universe()).zero();
      if (!is_measurable) {
        record.outcome = InjectionOutcome::NotMeasurable;
      } else {
        ++measurable;
        evaluation_sum += static_cast<double>(record.distinct_evaluations);
        record.outcome = classify(project, report);
      }
    } catch (const Error& err) {
      ++result.search_failures;
      record.outcome = InjectionOutcome::MissedFind;
      record.found = std::string("search failed: ") + err.what();
      ++measurable;
    }

    switch (record.outcome) {
      case InjectionOutcome::ExactFind: ++result.exact_finds; break;
      case InjectionOutcome::IndirectFind: ++result.indirect_finds; break;
      case InjectionOutcome::WrongFind: ++result.wrong_finds; break;
      case InjectionOutcome::MissedFind: ++result.missed_finds; break;
      case InjectionOutcome::NotMeasurable: ++result.not_measurable; break;
    }
    result.records.push_back(std::move(record));
  }

  true_positives = result.exact_finds + result.indirect_finds;
  if (measurable > 0) {
    std::size_t reported = true_positives + result.wrong_finds;
    result.precision = reported == 0 ? 1.0
                                     : static_cast<double>(true_positives) /
                                           static_cast<double>(reported);
    result.recall = static_cast<double>(true_positives) /
                    static_cast<double>(true_positives + result.missed_finds);
    result.mean_evaluations =
        evaluation_sum / static_cast<double>(measurable);
  }
  return result;
}

}  // namespace sim
}  // namespace varisect
