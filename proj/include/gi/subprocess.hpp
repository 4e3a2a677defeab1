#pragma once

#include <chrono>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace gi {

struct ProcessResult {
  int exit_code = -1;  // -1 when killed by a signal
  bool timed_out = false;
  std::string output;  // stdout
  std::chrono::milliseconds elapsed{0};
};

// Spawn failures and similar host problems, as opposed to a command failing.
class SpawnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Runs `/bin/sh -c command` in `cwd` inside a fresh process group. On
// reaching `timeout` the whole group is sent SIGKILL. stderr is discarded.
ProcessResult run_command(const std::string& command, const std::filesystem::path& cwd,
                          std::chrono::milliseconds timeout);

// Single-quoted for /bin/sh.
std::string shell_quote(const std::string& s);

}  // namespace gi
