#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace optforge {

struct CommandSpec {
  std::vector<std::string> argv;              // argv[0] resolved via PATH
  std::optional<std::filesystem::path> cwd;   // child working directory
  double timeout_seconds = 0.0;               // 0 = no timeout
  std::size_t capture_cap_bytes = 4u << 20;   // per-stream capture cap
};

/// A stdout line with its arrival time relative to process start (seconds).
struct TimedLine {
  double at_seconds = 0.0;
  std::string text;
};

struct CommandResult {
  bool start_failed = false;       // exec failed (e.g. missing binary)
  std::string start_error;         // errno text when start_failed
  int exit_code = -1;              // valid when exited normally
  bool exited_normally = false;
  int term_signal = 0;             // when killed by a signal
  bool timed_out = false;
  double wall_seconds = 0.0;
  std::string stdout_text;
  std::string stderr_text;
  std::vector<TimedLine> stdout_lines;  // timestamped, for marker timing

  bool ok() const { return !start_failed && exited_normally && exit_code == 0 && !timed_out; }
};

/// Runs the command in its own process group, captures both streams, kills the
/// whole group on timeout. stdout lines are timestamped as they arrive.
CommandResult run_command(const CommandSpec& spec);

/// Splits a whitespace-separated command template and substitutes
/// {placeholder} tokens. No shell is involved, so no quoting rules apply.
std::vector<std::string> render_command_template(
    const std::string& command_template,
    const std::vector<std::pair<std::string, std::string>>& substitutions);

}  // namespace optforge
