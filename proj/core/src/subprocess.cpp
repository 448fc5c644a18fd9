#include "varisect/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>

#include "varisect/errors.hpp"

namespace varisect {

namespace {

class Pipe {
 public:
  Pipe() {
    if (pipe2(fds_, O_CLOEXEC) != 0) {
      throw ToolchainError(std::string("pipe: ") + std::strerror(errno));
    }
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  int read_fd() const { return fds_[0]; }
  int write_fd() const { return fds_[1]; }
  void close_read() {
    if (fds_[0] >= 0) ::close(fds_[0]);
    fds_[0] = -1;
  }
  void close_write() {
    if (fds_[1] >= 0) ::close(fds_[1]);
    fds_[1] = -1;
  }

 private:
  int fds_[2] = {-1, -1};
};

void drain(int fd, std::string& sink) {
  char buf[4096];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n > 0) {
      sink.append(buf, static_cast<std::size_t>(n));
    } else {
      return;
    }
  }
}

}  // namespace

std::map<std::string, std::string> scrubbed_env(
    const std::map<std::string, std::string>& extra) {
  std::map<std::string, std::string> env{
      {"PATH", "/usr/local/bin:/usr/bin:/bin"},
      {"LC_ALL", "C"},
  };
  for (const auto& [key, value] : extra) env[key] = value;
  return env;
}

std::optional<std::string> find_program(
    const std::string& name, const std::map<std::string, std::string>& env) {
  namespace fs = std::filesystem;
  if (name.find('/') != std::string::npos) {
    std::error_code ec;
    return fs::exists(name, ec) ? std::optional<std::string>(name)
                                : std::nullopt;
  }
  auto it = env.find("PATH");
  if (it == env.end()) return std::nullopt;
  std::string path = it->second;
  std::size_t at = 0;
  while (at <= path.size()) {
    std::size_t colon = path.find(':', at);
    std::string dir =
        path.substr(at, colon == std::string::npos ? colon : colon - at);
    if (!dir.empty()) {
      fs::path candidate = fs::path(dir) / name;
      std::error_code ec;
      if (fs::exists(candidate, ec) &&
          ::access(candidate.c_str(), X_OK) == 0) {
        return candidate.string();
      }
    }
    if (colon == std::string::npos) break;
    at = colon + 1;
  }
  return std::nullopt;
}

std::string command_line(const std::vector<std::string>& argv) {
  std::string out;
  for (const auto& arg : argv) {
    if (!out.empty()) out += ' ';
    if (arg.find_first_of(" \t\"'\\$") == std::string::npos && !arg.empty()) {
      out += arg;
    } else {
      out += '\'';
      for (char c : arg) {
        if (c == '\'') out += "'\\''";
        else out += c;
      }
      out += '\'';
    }
  }
  return out;
}

RunResult run_process(const std::vector<std::string>& argv,
                      const std::map<std::string, std::string>& env,
                      double timeout_seconds, const std::string& working_dir) {
  if (argv.empty()) throw ToolchainError("empty command");
  auto program = find_program(argv[0], env);
  if (!program) {
    throw ToolchainError("program not found: " + argv[0]);
  }

  std::vector<std::string> env_strings;
  env_strings.reserve(env.size());
  for (const auto& [key, value] : env) env_strings.push_back(key + "=" + value);
  std::vector<char*> envp;
  for (auto& s : env_strings) envp.push_back(s.data());
  envp.push_back(nullptr);

  std::vector<char*> args;
  std::vector<std::string> argv_copy = argv;
  for (auto& s : argv_copy) args.push_back(s.data());
  args.push_back(nullptr);

  Pipe out_pipe;
  Pipe err_pipe;

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, out_pipe.write_fd(), STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe.write_fd(), STDERR_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null",
                                   O_RDONLY, 0);
  if (!working_dir.empty()) {
    posix_spawn_file_actions_addchdir_np(&actions, working_dir.c_str());
  }

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  // Own process group, so a timeout can kill the whole tree.
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  auto started = std::chrono::steady_clock::now();
  pid_t pid = -1;
  int rc = posix_spawn(&pid, program->c_str(), &actions, &attr, args.data(),
                       envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) {
    throw ToolchainError("failed to spawn " + *program + ": " +
                         std::strerror(rc));
  }
  out_pipe.close_write();
  err_pipe.close_write();

  RunResult result;
  bool out_open = true;
  bool err_open = true;
  bool killed = false;
  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t count = 0;
    if (out_open) fds[count++] = {out_pipe.read_fd(), POLLIN, 0};
    if (err_open) fds[count++] = {err_pipe.read_fd(), POLLIN, 0};

    double elapsed = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - started)
                         .count();
    int wait_ms = 200;
    if (!killed && timeout_seconds > 0 && elapsed >= timeout_seconds) {
      ::kill(-pid, SIGKILL);
      killed = true;
      result.timed_out = true;
    }
    int ready = ::poll(fds, count, wait_ms);
    if (ready < 0 && errno != EINTR) break;
    if (ready <= 0) continue;
    nfds_t at = 0;
    if (out_open) {
      if (fds[at].revents & (POLLIN | POLLHUP)) {
        char buf[4096];
        ssize_t n = ::read(out_pipe.read_fd(), buf, sizeof(buf));
        if (n > 0) result.out.append(buf, static_cast<std::size_t>(n));
        else out_open = false;
      }
      ++at;
    }
    if (err_open && at < count) {
      if (fds[at].revents & (POLLIN | POLLHUP)) {
        char buf[4096];
        ssize_t n = ::read(err_pipe.read_fd(), buf, sizeof(buf));
        if (n > 0) result.err.append(buf, static_cast<std::size_t>(n));
        else err_open = false;
      }
    }
  }
  // Pipes are closed; collect whatever is left and reap.
  drain(out_pipe.read_fd(), result.out);
  drain(err_pipe.read_fd(), result.err);

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.wall_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace varisect
