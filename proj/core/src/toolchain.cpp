#include "varisect/toolchain.hpp"

#include <cxxabi.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <future>
#include <semaphore>
#include <sstream>

#include <json.hpp>

#include "varisect/comparator.hpp"
#include "varisect/subprocess.hpp"

namespace varisect {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string demangle(const std::string& name) {
  int status = 1;
  char* out = abi::__cxa_demangle(name.c_str(), nullptr, nullptr, &status);
  if (status == 0 && out) {
    std::string result(out);
    std::free(out);
    return result;
  }
  if (out) std::free(out);
  return name;
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string head_of(const std::string& text, std::size_t limit = 2000) {
  if (text.size() <= limit) return text;
  return text.substr(0, limit) + "... [truncated]";
}

std::string plan_key(const BuildPlan& plan) {
  std::string key = plan.baseline.display();
  key += '\x1f';
  key += plan.candidate.display();
  key += '\x1f';
  for (const auto& e : plan.candidate_files) {
    key += e.file;
    key += ';';
  }
  key += plan.pic_override ? "pic" : "nopic";
  if (plan.weakened) {
    key += '\x1f';
    key += plan.weakened->file.file;
    auto chosen = plan.weakened->chosen;
    std::sort(chosen.begin(), chosen.end());
    for (const auto& s : chosen) {
      key += ':';
      key += s;
    }
  }
  return key;
}

}  // namespace

ToolchainBackend::ToolchainBackend(RunSettings settings,
                                   fs::path results_dir, std::size_t jobs)
    : settings_(std::move(settings)),
      results_dir_(std::move(results_dir)),
      jobs_(jobs == 0 ? 1 : jobs) {
  objects_dir_ = results_dir_ / "objects";
  builds_dir_ = results_dir_ / "builds";
  inputs_dir_ = results_dir_ / "inputs";
  fs::create_directories(objects_dir_);
  fs::create_directories(builds_dir_);
  fs::create_directories(inputs_dir_);
  fs::create_directories(results_dir_ / "runs");
  fs::create_directories(results_dir_ / "baseline");
  env_ = scrubbed_env(manifest().env);
  run_log_.open(results_dir_ / "runs" / "evaluations.jsonl", std::ios::app);
}

std::vector<const TestSpec*> ToolchainBackend::selected_specs(
    const std::vector<std::string>& test_names) const {
  std::vector<const TestSpec*> specs;
  if (test_names.empty()) {
    for (const auto& t : manifest().tests) specs.push_back(&t);
  } else {
    for (const auto& name : test_names) {
      specs.push_back(&manifest().test_named(name));
    }
  }
  return specs;
}

fs::path ToolchainBackend::compile_object(const std::string& file,
                                          const Compilation& compilation,
                                          bool pic) {
  const CompilerSpec& compiler = settings_.compiler(compilation.compiler_id);
  std::string key = file;
  key += '\x1f';
  key += compilation.display();
  key += '\x1f';
  key += pic ? "pic" : "nopic";
  fs::path stem = fs::path(file).stem();
  fs::path object =
      objects_dir_ / (stem.string() + "_" + hex16(fnv1a(key)) + ".o");
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (fs::exists(object)) return object;
  }

  std::vector<std::string> argv{compiler.binary};
  for (const auto& f : compiler.fixed_flags) argv.push_back(f);
  for (const auto& f : manifest().common_flags) argv.push_back(f);
  argv.push_back(compilation.optimization_level);
  for (const auto& sw : compilation.switches) argv.push_back(sw);
  if (pic) {
    for (const auto& tok : tokens_of(compiler.pic_flag)) argv.push_back(tok);
  }
  static std::atomic<std::uint64_t> temp_counter{0};
  fs::path temp = object;
  temp += ".tmp" + std::to_string(temp_counter++);
  argv.push_back("-c");
  argv.push_back((manifest().root / file).string());
  argv.push_back("-o");
  argv.push_back(temp.string());

  RunResult result = run_process(argv, env_, manifest().timeout_seconds);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    ++compiler_invocations_;
  }
  if (!result.ok()) {
    std::error_code ec;
    fs::remove(temp, ec);
    throw BuildError("compile failed: " + command_line(argv),
                     head_of(result.err));
  }
  std::lock_guard<std::mutex> lock(mutex_);
  if (!fs::exists(object)) {
    fs::rename(temp, object);
  } else {
    std::error_code ec;
    fs::remove(temp, ec);
  }
  return object;
}

std::vector<std::string> ToolchainBackend::defined_strong_globals(
    const fs::path& object) {
  RunResult result =
      run_process({settings_.tools.nm, "-p", object.string()}, env_,
                  manifest().timeout_seconds);
  if (!result.ok()) {
    throw ToolchainError("nm failed on " + object.string() + ": " +
                         head_of(result.err, 500));
  }
  std::vector<std::string> names;
  std::istringstream lines(result.out);
  std::string line;
  while (std::getline(lines, line)) {
    auto toks = tokens_of(line);
    if (toks.size() < 2) continue;
    const std::string& name = toks.back();
    const std::string& type = toks[toks.size() - 2];
    if (type.size() != 1) continue;
    char t = type[0];
    // Defined globals that would collide if present strongly in two copies.
    if (std::isupper(static_cast<unsigned char>(t)) && t != 'U' && t != 'W' &&
        t != 'V') {
      names.push_back(name);
    }
  }
  return names;
}

ElementSet ToolchainBackend::list_exported_symbols(const fs::path& object,
                                                   const std::string& file) {
  RunResult result =
      run_process({settings_.tools.nm, "-p", object.string()}, env_,
                  manifest().timeout_seconds);
  if (!result.ok()) {
    throw ToolchainError("nm failed on " + object.string() + ": " +
                         head_of(result.err, 500));
  }
  std::vector<Element> symbols;
  std::istringstream lines(result.out);
  std::string line;
  while (std::getline(lines, line)) {
    auto toks = tokens_of(line);
    if (toks.size() < 2) continue;
    const std::string& name = toks.back();
    const std::string& type = toks[toks.size() - 2];
    // 'T': globally exported strong symbol in the text section, i.e. an
    // exported function definition. Locals are lowercase, weak is W/w.
    if (type == "T") {
      symbols.push_back(Element::symbol_of(file, name, true, demangle(name)));
    }
  }
  return ElementSet(std::move(symbols));
}

fs::path ToolchainBackend::weaken_copy(const fs::path& object,
                                       const std::vector<std::string>& symbols,
                                       const fs::path& out) {
  std::vector<std::string> argv{settings_.tools.objcopy};
  for (const auto& s : symbols) {
    argv.push_back("--weaken-symbol");
    argv.push_back(s);
  }
  argv.push_back(object.string());
  argv.push_back(out.string());
  RunResult result = run_process(argv, env_, manifest().timeout_seconds);
  if (!result.ok()) {
    throw BuildError("objcopy failed: " + command_line(argv),
                     head_of(result.err));
  }
  return out;
}

fs::path ToolchainBackend::build_mixed(const BuildPlan& plan) {
  if (plan.weakened && !plan.pic_override) {
    throw ContractError("symbol mixing requires the position-independence "
                        "override");
  }
  for (const auto& e : plan.candidate_files) {
    if (e.kind != ElementKind::File) {
      throw ContractError("candidate_files must hold file elements");
    }
  }

  fs::path build_dir = builds_dir_ / hex16(fnv1a(plan_key(plan)));
  fs::path exe = build_dir / "app";
  if (fs::exists(exe)) return exe;
  fs::create_directories(build_dir);

  const std::string weak_file =
      plan.weakened ? plan.weakened->file.file : std::string{};

  // Compile every ordinary file, bounded-parallel. The weakened file's two
  // copies are handled separately below.
  std::vector<std::string> ordinary;
  for (const auto& file : manifest().files) {
    if (file != weak_file) ordinary.push_back(file);
  }
  std::vector<fs::path> objects(ordinary.size());
  {
    std::counting_semaphore<256> slots(
        static_cast<std::ptrdiff_t>(std::min<std::size_t>(jobs_, 256)));
    std::vector<std::future<void>> futures;
    std::mutex error_mutex;
    std::exception_ptr first_error;
    for (std::size_t i = 0; i < ordinary.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] {
        slots.acquire();
        try {
          const std::string& file = ordinary[i];
          bool is_candidate =
              plan.candidate_files.contains(Element::file_of(file));
          objects[i] = compile_object(
              file, is_candidate ? plan.candidate : plan.baseline, false);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
        slots.release();
      }));
    }
    for (auto& f : futures) f.wait();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::vector<std::string> link_argv{
      settings_.compiler(plan.baseline.compiler_id).binary};
  for (const auto& obj : objects) link_argv.push_back(obj.string());

  if (plan.weakened) {
    fs::path base_obj = compile_object(weak_file, plan.baseline, true);
    fs::path cand_obj = compile_object(weak_file, plan.candidate, true);
    // The chosen symbols stay strong in the candidate copy and go weak in
    // the baseline copy; everything else the candidate copy defines goes
    // weak so the baseline wins it. The linker then keeps exactly one strong
    // definition per symbol.
    std::vector<std::string> weaken_cand;
    for (const auto& name : defined_strong_globals(cand_obj)) {
      if (std::find(plan.weakened->chosen.begin(), plan.weakened->chosen.end(),
                    name) == plan.weakened->chosen.end()) {
        weaken_cand.push_back(name);
      }
    }
    fs::path base_weak =
        weaken_copy(base_obj, plan.weakened->chosen, build_dir / "base_weak.o");
    fs::path cand_weak =
        weaken_copy(cand_obj, weaken_cand, build_dir / "cand_weak.o");
    link_argv.push_back(base_weak.string());
    link_argv.push_back(cand_weak.string());
  }

  for (const auto& f : manifest().link_flags) link_argv.push_back(f);
  link_argv.push_back("-o");
  link_argv.push_back(exe.string());
  RunResult link = run_process(link_argv, env_, manifest().timeout_seconds);
  if (!link.ok()) {
    throw BuildError("link failed: " + command_line(link_argv),
                     head_of(link.err));
  }
  return exe;
}

fs::path ToolchainBackend::input_file(const TestSpec& spec, std::size_t chunk,
                                      const std::vector<double>& values) {
  fs::path path =
      inputs_dir_ / (spec.name + "_" + std::to_string(chunk) + ".in");
  if (!fs::exists(path)) {
    std::ofstream out(path);
    for (double v : values) out << hex_double(v) << '\n';
  }
  return path;
}

TestValue ToolchainBackend::run_test_executable(const fs::path& exe,
                                                const TestSpec& spec) {
  auto chunks = spec.input_chunks();
  std::vector<TestValue> runs;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    fs::path input = input_file(spec, i, chunks[i]);
    RunResult result = run_process(
        {exe.string(), "--test", spec.name, "--input", input.string()}, env_,
        manifest().timeout_seconds, exe.parent_path().string());
    if (result.timed_out) {
      throw RunError("test '" + spec.name + "' timed out", head_of(result.err));
    }
    if (result.exit_code != 0) {
      throw RunError("test '" + spec.name + "' exited with code " +
                         std::to_string(result.exit_code),
                     head_of(result.err));
    }
    TestValue value = [&] {
      try {
        return TestValue::decode(result.out);
      } catch (const Error& err) {
        throw RunError("test '" + spec.name + "' produced malformed output: " +
                           err.what(),
                       head_of(result.out, 500));
      }
    }();
    ResultKind want = spec.result_kind;
    if (value.kind() != want) {
      throw RunError("test '" + spec.name + "' emitted a " +
                         std::string(to_string(value.kind())) +
                         " record, expected " + to_string(want),
                     {});
    }
    runs.push_back(std::move(value));
  }
  return TestValue::concatenate(runs);
}

double ToolchainBackend::time_test_executable(const fs::path& exe,
                                              const TestSpec& spec) {
  auto chunks = spec.input_chunks();
  double total = 0.0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    fs::path input = input_file(spec, i, chunks[i]);
    RunResult result = run_process(
        {exe.string(), "--test", spec.name, "--input", input.string()}, env_,
        manifest().timeout_seconds, exe.parent_path().string());
    if (result.timed_out || result.exit_code != 0) {
      throw RunError("timed run of '" + spec.name + "' failed",
                     head_of(result.err));
    }
    total += result.wall_seconds;
  }
  return total;
}

const TestValue& ToolchainBackend::baseline_output(const TestSpec& spec) {
  auto it = baseline_outputs_.find(spec.name);
  if (it != baseline_outputs_.end()) return it->second;
  BuildPlan plan;
  plan.candidate = manifest().correctness_baseline;
  plan.baseline = manifest().correctness_baseline;
  fs::path exe = build_mixed(plan);
  TestValue value = run_test_executable(exe, spec);
  std::ofstream wire(results_dir_ / "baseline" / (spec.name + ".wire"));
  wire << value.encode();
  return baseline_outputs_.emplace(spec.name, std::move(value)).first->second;
}

PreflightReport ToolchainBackend::preflight() {
  PreflightReport report;
  report.runs = manifest().preflight_runs;
  BuildPlan plan;
  plan.candidate = manifest().correctness_baseline;
  plan.baseline = manifest().correctness_baseline;
  fs::path exe = build_mixed(plan);
  for (const auto& spec : manifest().tests) {
    std::string first;
    for (int run = 0; run < report.runs; ++run) {
      std::string wire;
      try {
        wire = run_test_executable(exe, spec).encode();
      } catch (const RunError&) {
        report.offending_tests.push_back(spec.name);
        report.deterministic = false;
        break;
      }
      if (run == 0) {
        first = wire;
      } else if (wire != first) {
        report.offending_tests.push_back(spec.name);
        report.deterministic = false;
        break;
      }
    }
  }
  return report;
}

void ToolchainBackend::log_evaluation(const BuildPlan& plan,
                                      const TestScore& score, double seconds) {
  json record;
  record["candidate"] = plan.candidate.display();
  record["baseline"] = plan.baseline.display();
  json files = json::array();
  for (const auto& e : plan.candidate_files) files.push_back(e.file);
  record["candidate_files"] = std::move(files);
  record["pic"] = plan.pic_override;
  if (plan.weakened) {
    record["weakened"] = {{"file", plan.weakened->file.file},
                          {"chosen", plan.weakened->chosen}};
  }
  record["score"] = {{"value", score.value}, {"meta", to_string(score.meta)}};
  if (!score.diagnostics.empty()) {
    record["diagnostics"] = head_of(score.diagnostics, 500);
  }
  record["seconds"] = seconds;
  std::lock_guard<std::mutex> lock(mutex_);
  run_log_ << record.dump() << '\n';
  run_log_.flush();
}

TestScore ToolchainBackend::evaluate_plan(
    const BuildPlan& plan, const std::vector<const TestSpec*>& specs) {
  auto started = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         started)
        .count();
  };
  TestScore final_score = TestScore::measured_value(0.0);
  try {
    // Baseline outputs must exist before any mixed build is scored.
    for (const TestSpec* spec : specs) baseline_output(*spec);
    fs::path exe = build_mixed(plan);
    double worst = 0.0;
    for (const TestSpec* spec : specs) {
      TestValue candidate = run_test_executable(exe, *spec);
      TestScore score =
          compare_values(baseline_output(*spec), candidate, spec->comparator);
      if (score.failed()) {
        final_score = score;
        log_evaluation(plan, final_score, elapsed());
        return final_score;
      }
      worst = std::max(worst, score.value);
    }
    final_score = TestScore::measured_value(worst);
  } catch (const BuildError& err) {
    final_score = TestScore::build_failure(std::string(err.what()) + "\n" +
                                           err.diagnostics());
  } catch (const RunError& err) {
    final_score = TestScore::run_failure(std::string(err.what()) + "\n" +
                                         err.diagnostics());
  }
  log_evaluation(plan, final_score, elapsed());
  return final_score;
}

MemoizedTest ToolchainBackend::make_file_test(
    const Compilation& candidate, const std::vector<std::string>& test_names) {
  auto specs = selected_specs(test_names);
  Compilation baseline = manifest().correctness_baseline;
  return MemoizedTest([this, candidate, baseline, specs](const ElementSet& set) {
    BuildPlan plan;
    plan.candidate = candidate;
    plan.baseline = baseline;
    plan.candidate_files = set;
    return evaluate_plan(plan, specs);
  });
}

SymbolSearch ToolchainBackend::make_symbol_search(
    const Compilation& candidate, const Element& file,
    const std::vector<std::string>& test_names) {
  auto specs = selected_specs(test_names);
  Compilation baseline = manifest().correctness_baseline;

  SymbolSearch search;
  fs::path base_obj = compile_object(file.file, baseline, true);
  compile_object(file.file, candidate, true);
  search.universe = list_exported_symbols(base_obj, file.file);
  if (search.universe.empty()) {
    search.file_level_only = true;
    return search;
  }

  auto backend = [this, candidate, baseline, file,
                  specs](const ElementSet& set) {
    BuildPlan plan;
    plan.candidate = candidate;
    plan.baseline = baseline;
    plan.pic_override = true;
    BuildPlan::Weakened weakened;
    weakened.file = file;
    for (const auto& e : set) weakened.chosen.push_back(e.symbol);
    plan.weakened = std::move(weakened);
    return evaluate_plan(plan, specs);
  };
  search.test = std::make_shared<MemoizedTest>(backend);

  // Fallback check: if swapping in the whole candidate copy under the
  // position-independence override shows no variability, the override
  // removed it and the search cannot go below file level.
  const TestScore& full = (*search.test)(search.universe);
  if (full.zero()) {
    search.file_level_only = true;
  }
  return search;
}

SymbolProvider ToolchainBackend::symbol_provider(
    const Compilation& candidate, const std::vector<std::string>& test_names) {
  return [this, candidate, test_names](const Element& file) {
    return make_symbol_search(candidate, file, test_names);
  };
}

}  // namespace varisect
