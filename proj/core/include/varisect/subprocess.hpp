#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace varisect {

struct RunResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
  double wall_seconds = 0.0;

  bool ok() const { return exit_code == 0 && !timed_out; }
};

/// Runs a command with a fully explicit environment (nothing inherited),
/// capturing stdout and stderr. On timeout the process group is killed and
/// `timed_out` is set. argv[0] must be an absolute or PATH-resolvable
/// program name; resolution uses the PATH from `env`.
RunResult run_process(const std::vector<std::string>& argv,
                      const std::map<std::string, std::string>& env,
                      double timeout_seconds = 300.0,
                      const std::string& working_dir = {});

/// The minimal environment builds and test runs execute under: a fixed PATH
/// and C locale, plus the given extras. Keeps results independent of the
/// invoking shell.
std::map<std::string, std::string> scrubbed_env(
    const std::map<std::string, std::string>& extra = {});

/// Resolves a program name against the PATH of `env`. Returns the absolute
/// path, or nullopt when not found.
std::optional<std::string> find_program(
    const std::string& name, const std::map<std::string, std::string>& env);

/// Shell-style quoting for log lines.
std::string command_line(const std::vector<std::string>& argv);

}  // namespace varisect
