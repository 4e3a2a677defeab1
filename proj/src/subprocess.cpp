#include "gi/subprocess.hpp"

#include <cerrno>
#include <cstring>
#include <thread>

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

extern char** environ;

namespace gi {

namespace {

struct Fd {
  int fd = -1;
  ~Fd() { reset(); }
  void reset() {
    if (fd >= 0) ::close(fd);
    fd = -1;
  }
};

}  // namespace

std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

ProcessResult run_command(const std::string& command, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout) {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  Fd read_end{fds[0]}, write_end{fds[1]};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, write_end.fd, STDOUT_FILENO);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  // posix_spawn has no portable chdir action; go through the shell.
  const std::string script = "cd " + shell_quote(cwd.string()) + " && " + command;
  const char* argv[] = {"/bin/sh", "-c", script.c_str(), nullptr};
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr, const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw SpawnError(std::string("posix_spawn: ") + std::strerror(rc));
  write_end.reset();

  ProcessResult result;
  const auto start = std::chrono::steady_clock::now();
  const auto deadline = start + timeout;
  auto remaining_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now()).count();
  };

  bool open = true;
  int status = 0;
  char buf[4096];
  while (true) {
    if (open) {
      pollfd p{read_end.fd, POLLIN, 0};
      const auto wait = std::max<long long>(0, std::min<long long>(remaining_ms(), 50));
      if (::poll(&p, 1, static_cast<int>(wait)) > 0) {
        const ssize_t n = ::read(read_end.fd, buf, sizeof buf);
        if (n > 0) result.output.append(buf, static_cast<std::size_t>(n));
        else if (n == 0 || errno != EINTR) open = false;
      }
    } else {
      std::this_thread::sleep_for(std::chrono::milliseconds(std::max<long long>(0, std::min<long long>(remaining_ms(), 5))));
    }
    if (::waitpid(pid, &status, WNOHANG) == pid) {
      // Stray background children would hold the pipe open; the foreground
      // work has finished, so its output is already buffered.
      ::kill(-pid, SIGKILL);
      while (open) {
        const ssize_t n = ::read(read_end.fd, buf, sizeof buf);
        if (n > 0) result.output.append(buf, static_cast<std::size_t>(n));
        else if (n == 0 || errno != EINTR) open = false;
      }
      break;
    }
    if (remaining_ms() <= 0) {
      ::kill(-pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
  }
  result.elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  if (!result.timed_out && WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  return result;
}

}  // namespace gi
