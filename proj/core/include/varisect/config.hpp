#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "varisect/compilation.hpp"
#include "varisect/element.hpp"
#include "varisect/test_spec.hpp"

namespace varisect {

struct CompilerSpec {
  std::string id;
  std::string binary;  // absolute path, or a name resolved via PATH
  std::vector<std::string> levels;
  /// Each entry is one switch combination; a combination may hold several
  /// flags that only make sense together.
  std::vector<std::string> switch_sets;
  std::string pic_flag = "-fPIC";
  std::vector<std::string> fixed_flags;
};

struct ToolPaths {
  std::string nm = "nm";
  std::string objcopy = "objcopy";
};

/// Everything the build backend needs to know about the project under
/// analysis. File order here is the canonical file order.
struct ProjectManifest {
  std::filesystem::path root;  // absolute after loading
  std::vector<std::string> files;
  std::vector<std::string> common_flags;
  std::vector<std::string> link_flags;
  std::vector<TestSpec> tests;
  Compilation correctness_baseline;
  Compilation performance_reference;
  double timeout_seconds = 300.0;
  int preflight_runs = 3;
  std::map<std::string, std::string> env;

  ElementSet file_universe() const;
  const TestSpec& test_named(const std::string& name) const;
};

struct RunSettings {
  ProjectManifest manifest;
  std::map<std::string, CompilerSpec> compilers;
  ToolPaths tools;
  std::filesystem::path config_path;

  const CompilerSpec& compiler(const std::string& id) const;
};

/// Loads and validates the line-oriented configuration file. Paths in the
/// file resolve relative to its directory. Throws ConfigError with the
/// offending line number on malformed input.
RunSettings load_config(const std::filesystem::path& path);

/// Parses a compilation reference of the form
/// "<compiler-id> <level> [switch...]" against configured compilers.
Compilation parse_compilation_ref(const std::string& text,
                                  const RunSettings& settings);

}  // namespace varisect
