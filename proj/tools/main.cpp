#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "varisect/bisect.hpp"
#include "varisect/config.hpp"
#include "varisect/json_io.hpp"
#include "varisect/oracle.hpp"
#include "varisect/sim.hpp"
#include "varisect/subprocess.hpp"
#include "varisect/sweep.hpp"
#include "varisect/toolchain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace varisect;

namespace {

// Stable exit codes for CI use.
constexpr int kExitOk = 0;
constexpr int kExitProblemFound = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitToolchainFailure = 3;
constexpr int kExitAssumptionViolated = 4;

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "results";
  std::string backend = "toolchain";
  std::size_t jobs = 4;
  std::uint64_t seed = 0;
};

struct SimShape {
  std::size_t n_files = 8;
  std::size_t symbols_per_file = 4;
  std::size_t count = 1;
  std::string mode = "independent";
  bool sub_file_cancellation = false;
};

std::string slugify(const std::string& text) {
  std::string out;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) out += c;
    else if (!out.empty() && out.back() != '_') out += '_';
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out;
}

/// Creates the output directory and drops a snapshot of the config used, so
/// every results directory records how it was produced.
fs::path prepare_out_dir(const GlobalOptions& global) {
  fs::path out(global.out_dir);
  fs::create_directories(out);
  if (!global.config_path.empty()) {
    std::error_code ec;
    fs::copy_file(global.config_path, out / "config.snapshot",
                  fs::copy_options::overwrite_existing, ec);
  }
  return out;
}

RunSettings require_config(const GlobalOptions& global) {
  if (global.config_path.empty()) {
    throw ConfigError("--config is required for this command");
  }
  return load_config(global.config_path);
}

void print_report(std::ostream& os, const BisectReport& report) {
  os << "assertion: " << to_string(report.assertion_status);
  if (!report.violated_assumptions.empty()) {
    os << " (candidate assumptions:";
    for (auto a : report.violated_assumptions) os << ' ' << to_string(a);
    os << ')';
  }
  os << '\n';
  if (report.possible_false_negatives) {
    os << "warning: results may have false negatives\n";
  }
  os << "distinct evaluations: " << report.distinct_evaluations << " ("
     << report.total_calls << " calls over a search space of "
     << report.search_space_size << ")\n";
  if (report.found.empty()) {
    os << "found: nothing\n";
  } else {
    os << "found (by decreasing score):\n";
    for (const auto& f : report.found) {
      std::ostringstream score;
      score << std::setprecision(17) << f.score;
      os << "  " << std::left << std::setw(24) << score.str()
         << f.element.display() << '\n';
    }
  }
  for (const auto& e : report.file_level_only) {
    os << "file-level only (symbol search not possible): " << e.display()
       << '\n';
  }
}

int exit_code_for(const BisectReport& report, bool check_mode) {
  if (report.assertion_status == AssertionStatus::Violated) {
    return kExitAssumptionViolated;
  }
  if (check_mode && !report.found.empty()) return kExitProblemFound;
  return kExitOk;
}

sim::SyntheticProject make_sim_project(const GlobalOptions& global,
                                       const SimShape& shape) {
  sim::SyntheticProject project = sim::generate_project(
      global.seed, shape.n_files, shape.symbols_per_file, shape.count,
      sim::mode_from_string(shape.mode));
  project.sub_file_cancellation = shape.sub_file_cancellation;
  return project;
}

int cmd_check(const GlobalOptions& global) {
  RunSettings settings = require_config(global);
  if (settings.manifest.tests.empty()) {
    throw ConfigError("no tests configured; nothing to check");
  }
  fs::path out = prepare_out_dir(global);
  ToolchainBackend backend(settings, out, global.jobs);
  PreflightReport report = backend.preflight();
  if (report.deterministic) {
    std::cout << "determinism check passed: " << settings.manifest.tests.size()
              << " test(s) x " << report.runs << " runs bitwise identical\n";
    return kExitOk;
  }
  std::cout << "determinism check FAILED for:";
  for (const auto& name : report.offending_tests) std::cout << ' ' << name;
  std::cout << "\nhint: make these tests deterministic before any analysis "
               "(pin seeds and thread counts, avoid time/PID-dependent "
               "output, sort reductions).\n";
  return kExitProblemFound;
}

int cmd_sweep(const GlobalOptions& global, int runs, bool resume) {
  RunSettings settings = require_config(global);
  if (settings.manifest.tests.empty()) {
    throw ConfigError("no tests configured; nothing to sweep");
  }
  fs::path out = prepare_out_dir(global);
  ToolchainBackend backend(settings, out, global.jobs);

  PreflightReport preflight = backend.preflight();
  if (!preflight.deterministic) {
    std::cout << "refusing to sweep: nondeterministic tests:";
    for (const auto& name : preflight.offending_tests) std::cout << ' ' << name;
    std::cout << "\nrun `varisect check` for details.\n";
    return kExitProblemFound;
  }

  std::vector<Compilation> matrix = plan_matrix(settings);
  std::cout << "sweeping " << matrix.size() << " compilations x "
            << settings.manifest.tests.size() << " tests\n";
  SweepOptions options;
  options.runs_per_timing = runs;
  options.resume = resume;
  auto records = run_sweep(backend, matrix, options, out / "sweep.jsonl");
  SweepSummary summary = summarize(records, settings.manifest);
  write_summary(summary, out);

  for (const auto& cs : summary.compilers) {
    std::cout << cs.compiler_id << ": " << cs.variable_runs << " of "
              << cs.total_runs << " runs variable (" << std::fixed
              << std::setprecision(1) << cs.variable_percent << "%)";
    std::cout.unsetf(std::ios::fixed);
    if (cs.best_flags) {
      std::cout << ", best flags: " << cs.best_flags->display()
                << " (mean speedup " << std::setprecision(4)
                << *cs.mean_speedup << ")";
    }
    std::cout << '\n';
  }
  std::cout << "records: " << (out / "sweep.jsonl").string()
            << "\nsummary: " << (out / "summary.json").string() << '\n';
  return kExitOk;
}

int bisect_sim(const GlobalOptions& global, const SimShape& shape,
               std::optional<std::size_t> k, bool files_only, bool check_mode,
               const fs::path& out) {
  sim::SyntheticProject project = make_sim_project(global, shape);
  MemoizedTest file_test = sim::make_file_test(project);
  HierarchicalOptions options;
  options.k = k;
  options.files_only = files_only;
  BisectReport report;
  report = hierarchical_bisect(file_test, project.file_universe(),
                               sim::symbol_provider(project), options);

  std::cout << "simulated project: seed=" << global.seed << " files="
            << shape.n_files << " symbols/file=" << shape.symbols_per_file
            << " mode=" << shape.mode << '\n';
  print_report(std::cout, report);

  auto expected = project.expected_findings();
  bool matches = true;
  std::vector<Element> reported;
  for (const auto& f : report.found) reported.push_back(f.element);
  for (const auto& e : expected) {
    if (std::find(reported.begin(), reported.end(), e) == reported.end()) {
      matches = false;
    }
  }
  for (const auto& e : reported) {
    if (std::find(expected.begin(), expected.end(), e) == expected.end()) {
      matches = false;
    }
  }
  if (!files_only && !k) {
    std::cout << "ground truth match: " << (matches ? "yes" : "NO") << '\n';
  }

  json doc;
  doc["backend"] = "sim";
  doc["report"] = report;
  doc["seed"] = global.seed;
  doc["mode"] = shape.mode;
  std::ofstream(out / "bisect_sim.json") << doc.dump(2) << '\n';
  return exit_code_for(report, check_mode);
}

int cmd_bisect(const GlobalOptions& global, const std::string& candidate_ref,
               std::vector<std::string> test_names, bool all_tests,
               std::optional<std::size_t> k, bool files_only, bool check_mode,
               const SimShape& shape) {
  fs::path out = prepare_out_dir(global);
  if (global.backend == "sim") {
    return bisect_sim(global, shape, k, files_only, check_mode, out);
  }

  RunSettings settings = require_config(global);
  if (candidate_ref.empty()) {
    throw ConfigError("--candidate '<compiler> <level> [switches...]' is "
                      "required with the toolchain backend");
  }
  Compilation candidate = parse_compilation_ref(candidate_ref, settings);
  if (all_tests) {
    test_names.clear();
    for (const auto& t : settings.manifest.tests) test_names.push_back(t.name);
  }
  if (test_names.empty()) {
    throw ConfigError("name a test with --test, or pass --all-tests");
  }

  ToolchainBackend backend(settings, out, global.jobs);
  int worst_exit = kExitOk;
  for (const auto& test_name : test_names) {
    settings.manifest.test_named(test_name);  // validate early
    std::cout << "== bisect: candidate '" << candidate.display()
              << "' on test '" << test_name << "' ==\n";
    MemoizedTest file_test = backend.make_file_test(candidate, {test_name});
    ElementSet universe = backend.file_universe();

    const TestScore& whole = file_test(universe);
    BisectReport report;
    if (!whole.positive()) {
      std::cout << "no variability: candidate matches the baseline on this "
                   "test (1 evaluation)\n";
      report.search_space_size = universe.size();
      report.distinct_evaluations = file_test.distinct_evaluations();
      report.total_calls = file_test.total_calls();
    } else {
      HierarchicalOptions options;
      options.k = k;
      options.files_only = files_only;
      report = hierarchical_bisect(file_test, universe,
                                   backend.symbol_provider(candidate,
                                                           {test_name}),
                                   options);
      print_report(std::cout, report);
    }

    json doc;
    doc["backend"] = "toolchain";
    doc["candidate"] = candidate;
    doc["test"] = test_name;
    doc["report"] = report;
    fs::path report_path =
        out / ("bisect_" + slugify(candidate.display()) + "_" +
               slugify(test_name) + ".json");
    std::ofstream(report_path) << doc.dump(2) << '\n';
    std::cout << "report: " << report_path.string() << '\n';
    worst_exit = std::max(worst_exit, exit_code_for(report, check_mode));
  }
  return worst_exit;
}

int cmd_inject(const GlobalOptions& global, const SimShape& shape,
               std::optional<std::size_t> k, const std::string& out_file) {
  sim::CampaignConfig config;
  config.seed = global.seed;
  config.n_files = shape.n_files;
  config.symbols_per_file = shape.symbols_per_file;
  config.count = shape.count;
  config.mode = sim::mode_from_string(shape.mode);
  config.k = k;

  sim::InjectionCampaignResult result = sim::run_injection_campaign(config);

  fs::path out = prepare_out_dir(global);
  fs::path path = out_file.empty() ? out / "injection_campaign.json"
                                   : fs::path(out_file);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream(path) << json(result).dump(2) << '\n';

  auto row = [](const std::string& label, std::size_t count) {
    std::cout << "  " << std::left << std::setw(18) << label << std::right
              << std::setw(8) << count << '\n';
  };
  std::cout << "injection campaign (" << to_string(config.mode) << ", "
            << config.count << " injections over " << config.n_files << " x "
            << config.symbols_per_file << " symbols)\n";
  row("exact finds", result.exact_finds);
  row("indirect finds", result.indirect_finds);
  row("wrong finds", result.wrong_finds);
  row("missed finds", result.missed_finds);
  row("not measurable", result.not_measurable);
  row("total", result.records.size());
  if (result.precision) {
    std::cout << "  precision " << *result.precision << ", recall "
              << *result.recall << ", mean evaluations "
              << *result.mean_evaluations << '\n';
  }
  if (result.assertion_violations > 0) {
    std::cout << "  assertion violations: " << result.assertion_violations
              << '\n';
  }
  std::cout << "campaign record: " << path.string() << '\n';
  return result.search_failures == 0 ? kExitOk : kExitToolchainFailure;
}

int cmd_oracle(const GlobalOptions& global, const SimShape& shape) {
  sim::SyntheticProject project = make_sim_project(global, shape);
  MemoizedTest file_test = sim::make_file_test(project);
  ElementSet universe = project.file_universe();
  OracleVerdict verdict = oracle_verdict(universe, file_test);

  json doc;
  doc["seed"] = global.seed;
  doc["mode"] = shape.mode;
  doc["universe"] = universe;
  doc["verdict"] = verdict;
  std::cout << doc.dump() << '\n';
  return kExitOk;
}

int cmd_report(const GlobalOptions& global) {
  fs::path out(global.out_dir);
  fs::path sweep_path = out / "sweep.jsonl";
  std::vector<fs::path> bisect_reports;
  if (fs::exists(out)) {
    for (const auto& entry : fs::directory_iterator(out)) {
      std::string name = entry.path().filename().string();
      if (name.rfind("bisect_", 0) == 0 && entry.path().extension() == ".json") {
        bisect_reports.push_back(entry.path());
      }
    }
  }
  std::sort(bisect_reports.begin(), bisect_reports.end());

  bool have_sweep = fs::exists(sweep_path);
  if (!have_sweep && bisect_reports.empty()) {
    std::cout << "nothing to report in " << out.string()
              << " (no sweep.jsonl, no bisect reports)\n";
    return kExitConfigError;
  }

  if (have_sweep) {
    if (global.config_path.empty()) {
      throw ConfigError("--config is required to summarize sweep records");
    }
    RunSettings settings = load_config(global.config_path);
    auto records = load_sweep_records(sweep_path);
    SweepSummary summary = summarize(records, settings.manifest);
    write_summary(summary, out);
    std::cout << "sweep: " << records.size() << " records\n";
    for (const auto& cs : summary.compilers) {
      std::cout << "  " << std::left << std::setw(12) << cs.compiler_id
                << cs.variable_runs << " of " << cs.total_runs
                << " runs variable (" << std::fixed << std::setprecision(1)
                << cs.variable_percent << "%)";
      std::cout.unsetf(std::ios::fixed);
      if (cs.best_flags) {
        std::cout << "; best flags " << cs.best_flags->display()
                  << ", mean speedup " << std::setprecision(4)
                  << *cs.mean_speedup;
      }
      std::cout << '\n';
    }
    for (const auto& [test, best] : summary.best) {
      std::cout << "  " << test << ": ";
      if (best.fastest_bitwise_equal) {
        std::cout << "fastest bitwise-equal " << std::setprecision(4)
                  << best.fastest_bitwise_equal->speedup << " ("
                  << best.fastest_bitwise_equal->compilation_id << ")";
      } else {
        std::cout << "no bitwise-equal results";
      }
      if (best.fastest_variable) {
        std::cout << "; fastest variable " << std::setprecision(4)
                  << best.fastest_variable->speedup << " ("
                  << best.fastest_variable->compilation_id << ")";
      }
      std::cout << '\n';
    }
    if (!summary.failures.empty()) {
      std::cout << "  failures: " << summary.failures.size() << " cell(s)\n";
    }
    std::cout << "  summary.json and series/*.csv regenerated\n";
  }

  if (!bisect_reports.empty()) {
    std::cout << "bisect digest:\n";
    for (const auto& path : bisect_reports) {
      std::ifstream in(path);
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& err) {
        std::cout << "  corrupt report " << path.filename().string() << ": "
                  << err.what() << '\n';
        continue;
      }
      std::string label = doc.contains("candidate")
                              ? doc["candidate"].value("id", "?")
                              : std::string("sim");
      std::string test = doc.value("test", "-");
      const json& report = doc["report"];
      std::cout << "  " << path.filename().string() << ": " << label;
      if (test != "-") std::cout << " on " << test;
      std::cout << " -> " << report.value("assertion_status", "?") << ", ";
      const auto& found = report["found"];
      if (found.empty()) {
        std::cout << "nothing found";
      } else {
        std::cout << found.size() << " element(s):";
        for (const auto& f : found) {
          const json& e = f["element"];
          std::cout << ' ' << e.value("file", "?");
          if (e.contains("symbol")) {
            std::cout << ":" << e.value("display", e.value("symbol", "?"));
          }
        }
      }
      std::cout << " (" << report.value("distinct_evaluations", 0)
                << " evaluations)\n";
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"compiler-induced variability analysis: sweep a compilation "
               "matrix, then bisect files and symbols to blame"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path,
                 "project configuration file");
  app.add_option("--out", global.out_dir, "results directory")
      ->capture_default_str();
  app.add_option("--backend", global.backend, "toolchain|sim")
      ->check(CLI::IsMember({"toolchain", "sim"}))
      ->capture_default_str();
  app.add_option("--jobs", global.jobs, "concurrent build jobs")
      ->capture_default_str();
  app.add_option("--seed", global.seed, "seed for simulated projects")
      ->capture_default_str();

  auto* check = app.add_subcommand("check", "verify every test is "
                                            "deterministic under the baseline");

  auto* sweep = app.add_subcommand(
      "sweep", "run the full compilation matrix over all tests");
  int sweep_runs = 3;
  bool sweep_resume = false;
  sweep->add_option("--runs", sweep_runs, "timed runs per cell (median taken)")
      ->capture_default_str();
  sweep->add_flag("--resume", sweep_resume, "skip cells already recorded");

  auto* bisect = app.add_subcommand(
      "bisect", "locate the files and symbols responsible for variability");
  std::string candidate_ref;
  std::vector<std::string> test_names;
  bool all_tests = false;
  bool files_only = false;
  bool check_mode = false;
  std::optional<std::size_t> k;
  SimShape shape;
  bisect->add_option("--candidate", candidate_ref,
                     "compilation under test: '<compiler> <level> [sw...]'");
  bisect->add_option("--test", test_names, "test name (repeatable)");
  bisect->add_flag("--all-tests", all_tests, "bisect every configured test");
  bisect->add_option("--k", k, "only the k biggest contributors (early exit)");
  bisect->add_flag("--files-only", files_only, "stop at file granularity");
  bisect->add_flag("--check", check_mode,
                   "exit 1 when variability is found (CI gate)");
  bisect->add_option("--files", shape.n_files, "sim: number of files");
  bisect->add_option("--symbols-per-file", shape.symbols_per_file,
                     "sim: symbols per file");
  bisect->add_option("--count", shape.count, "sim: number of injections");
  bisect->add_option("--mode", shape.mode,
                     "sim: independent|coupled|zero-magnitude|non-exported");
  bisect->add_flag("--sub-file-cancellation", shape.sub_file_cancellation,
                   "sim: make file scores land below their best symbol");

  auto* inject = app.add_subcommand(
      "inject", "run a synthetic injection campaign and score the search");
  SimShape inject_shape;
  inject_shape.n_files = 45;
  inject_shape.symbols_per_file = 25;
  inject_shape.count = 500;
  std::optional<std::size_t> inject_k;
  std::string inject_out;
  inject->add_option("--files", inject_shape.n_files, "number of files")
      ->capture_default_str();
  inject->add_option("--symbols-per-file", inject_shape.symbols_per_file,
                     "symbols per file")
      ->capture_default_str();
  inject->add_option("--count", inject_shape.count, "number of injections")
      ->capture_default_str();
  inject->add_option("--mode", inject_shape.mode,
                     "independent|coupled|zero-magnitude|non-exported")
      ->capture_default_str();
  inject->add_option("--k", inject_k, "use the biggest-k search");
  inject->add_option("--out", inject_out, "campaign JSON path");

  auto* oracle = app.add_subcommand(
      "oracle", "brute-force verdict for a simulated instance");
  oracle->group("");  // debugging verb, hidden from help
  SimShape oracle_shape;
  oracle->add_option("--files", oracle_shape.n_files, "number of files");
  oracle->add_option("--symbols-per-file", oracle_shape.symbols_per_file,
                     "symbols per file");
  oracle->add_option("--count", oracle_shape.count, "number of injections");
  oracle->add_option("--mode", oracle_shape.mode, "injection mode");

  auto* report = app.add_subcommand(
      "report", "regenerate summaries from persisted results");

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) return cmd_check(global);
    if (sweep->parsed()) return cmd_sweep(global, sweep_runs, sweep_resume);
    if (bisect->parsed()) {
      return cmd_bisect(global, candidate_ref, test_names, all_tests, k,
                        files_only, check_mode, shape);
    }
    if (inject->parsed()) {
      return cmd_inject(global, inject_shape, inject_k, inject_out);
    }
    if (oracle->parsed()) return cmd_oracle(global, oracle_shape);
    if (report->parsed()) return cmd_report(global);
  } catch (const ConfigError& err) {
    std::cerr << "configuration error: " << err.what() << '\n';
    return kExitConfigError;
  } catch (const TestFailure& err) {
    std::cerr << "toolchain failure: " << err.what() << '\n';
    return kExitToolchainFailure;
  } catch (const ToolchainError& err) {
    std::cerr << "toolchain failure: " << err.what() << '\n';
    return kExitToolchainFailure;
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitToolchainFailure;
  }
  return kExitOk;
}
