#include "varisect/config.hpp"

#include <fstream>
#include <sstream>

#include "varisect/errors.hpp"
#include "varisect/value.hpp"

namespace varisect {

ElementSet ProjectManifest::file_universe() const {
  std::vector<Element> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(Element::file_of(f));
  return ElementSet(std::move(out));
}

const TestSpec& ProjectManifest::test_named(const std::string& name) const {
  for (const auto& t : tests) {
    if (t.name == name) return t;
  }
  throw ConfigError("no such test: " + name);
}

const CompilerSpec& RunSettings::compiler(const std::string& id) const {
  auto it = compilers.find(id);
  if (it == compilers.end()) throw ConfigError("unknown compiler id: " + id);
  return it->second;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> tokens_of(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

struct Line {
  std::string section;
  std::string key;
  std::string value;
  int number;
};

[[noreturn]] void fail(const Line& line, const std::string& msg) {
  throw ConfigError("config line " + std::to_string(line.number) + ": " + msg);
}

}  // namespace

Compilation parse_compilation_ref(const std::string& text,
                                  const RunSettings& settings) {
  auto toks = tokens_of(text);
  if (toks.size() < 2) {
    throw ConfigError("compilation reference needs '<compiler> <level> "
                      "[switches...]', got '" +
                      text + "'");
  }
  settings.compiler(toks[0]);  // must exist
  return Compilation(toks[0], toks[1],
                     std::vector<std::string>(toks.begin() + 2, toks.end()));
}

RunSettings load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());

  RunSettings settings;
  settings.config_path = std::filesystem::absolute(path);
  std::filesystem::path base = settings.config_path.parent_path();

  std::string correctness_ref;
  std::string performance_ref;
  TestSpec* current_test = nullptr;
  CompilerSpec* current_compiler = nullptr;

  std::string section;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string text = trim(raw);
    if (text.empty() || text[0] == '#') continue;
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ConfigError("config line " + std::to_string(number) +
                          ": unterminated section header");
      }
      section = trim(text.substr(1, text.size() - 2));
      current_test = nullptr;
      current_compiler = nullptr;
      if (section.rfind("compiler.", 0) == 0) {
        std::string id = section.substr(9);
        if (id.empty()) {
          throw ConfigError("config line " + std::to_string(number) +
                            ": compiler section without an id");
        }
        auto [it, fresh] = settings.compilers.try_emplace(id);
        if (fresh) it->second.id = id;
        current_compiler = &it->second;
      } else if (section.rfind("tests.", 0) == 0) {
        std::string name = section.substr(6);
        if (name.empty()) {
          throw ConfigError("config line " + std::to_string(number) +
                            ": test section without a name");
        }
        settings.manifest.tests.push_back(TestSpec{});
        settings.manifest.tests.back().name = name;
        current_test = &settings.manifest.tests.back();
      } else if (section != "project" && section != "tools" &&
                 section != "baselines") {
        throw ConfigError("config line " + std::to_string(number) +
                          ": unknown section [" + section + "]");
      }
      continue;
    }

    std::size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) +
                        ": expected 'key = value'");
    }
    Line line{section, trim(text.substr(0, eq)), trim(text.substr(eq + 1)),
              number};
    if (line.section.empty()) fail(line, "key before any section");

    ProjectManifest& manifest = settings.manifest;
    if (line.section == "project") {
      if (line.key == "root") {
        manifest.root = std::filesystem::absolute(base / line.value);
      } else if (line.key == "file" || line.key == "files") {
        for (auto& f : tokens_of(line.value)) manifest.files.push_back(f);
      } else if (line.key == "common_flags") {
        for (auto& f : tokens_of(line.value)) manifest.common_flags.push_back(f);
      } else if (line.key == "link_flags") {
        for (auto& f : tokens_of(line.value)) manifest.link_flags.push_back(f);
      } else if (line.key == "timeout") {
        manifest.timeout_seconds = parse_double(line.value);
      } else if (line.key == "preflight_runs") {
        manifest.preflight_runs = std::stoi(line.value);
      } else if (line.key == "env") {
        std::size_t split = line.value.find('=');
        if (split == std::string::npos) fail(line, "env entries are KEY=VALUE");
        manifest.env[line.value.substr(0, split)] = line.value.substr(split + 1);
      } else {
        fail(line, "unknown [project] key '" + line.key + "'");
      }
    } else if (line.section == "tools") {
      if (line.key == "nm") settings.tools.nm = line.value;
      else if (line.key == "objcopy") settings.tools.objcopy = line.value;
      else fail(line, "unknown [tools] key '" + line.key + "'");
    } else if (line.section == "baselines") {
      if (line.key == "correctness") correctness_ref = line.value;
      else if (line.key == "performance") performance_ref = line.value;
      else fail(line, "unknown [baselines] key '" + line.key + "'");
    } else if (current_compiler) {
      CompilerSpec& spec = *current_compiler;
      if (line.key == "binary") {
        spec.binary = line.value;
      } else if (line.key == "level" || line.key == "levels") {
        for (auto& l : tokens_of(line.value)) spec.levels.push_back(l);
      } else if (line.key == "switch") {
        spec.switch_sets.push_back(line.value);  // one combination per line
      } else if (line.key == "switches") {
        for (auto& s : tokens_of(line.value)) spec.switch_sets.push_back(s);
      } else if (line.key == "pic_flag") {
        spec.pic_flag = line.value;
      } else if (line.key == "fixed_flags") {
        for (auto& f : tokens_of(line.value)) spec.fixed_flags.push_back(f);
      } else {
        fail(line, "unknown compiler key '" + line.key + "'");
      }
    } else if (current_test) {
      TestSpec& spec = *current_test;
      if (line.key == "inputs_per_run") {
        spec.inputs_per_run = static_cast<std::size_t>(std::stoul(line.value));
      } else if (line.key == "default_input") {
        for (auto& tok : tokens_of(line.value)) {
          spec.default_input.push_back(parse_double(tok));
        }
      } else if (line.key == "result_kind") {
        spec.result_kind = result_kind_from_string(line.value);
      } else if (line.key == "comparator") {
        spec.comparator.kind = comparator_kind_from_string(line.value);
      } else if (line.key == "digits") {
        if (!line.value.empty()) {
          int digits = std::stoi(line.value);
          if (digits < 1) fail(line, "digits must be positive");
          spec.comparator.digits = digits;
        }
      } else {
        fail(line, "unknown test key '" + line.key + "'");
      }
    } else {
      fail(line, "key in unrecognized context");
    }
  }

  // Cross-checks.
  ProjectManifest& manifest = settings.manifest;
  if (manifest.root.empty()) throw ConfigError("[project] root is required");
  if (manifest.files.empty()) throw ConfigError("[project] lists no files");
  if (settings.compilers.empty()) throw ConfigError("no compilers configured");
  for (const auto& [id, spec] : settings.compilers) {
    if (spec.binary.empty()) {
      throw ConfigError("compiler '" + id + "' has no binary");
    }
    if (spec.levels.empty()) {
      throw ConfigError("compiler '" + id + "' lists no optimization levels");
    }
  }
  for (auto& t : manifest.tests) t.validate();
  if (correctness_ref.empty() || performance_ref.empty()) {
    throw ConfigError("[baselines] must set both correctness and performance");
  }
  manifest.correctness_baseline =
      parse_compilation_ref(correctness_ref, settings);
  manifest.performance_reference =
      parse_compilation_ref(performance_ref, settings);
  for (const auto& f : manifest.files) {
    if (!std::filesystem::exists(manifest.root / f)) {
      throw ConfigError("project file does not exist: " +
                        (manifest.root / f).string());
    }
  }
  return settings;
}

}  // namespace varisect
