#include "optforge/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <stdexcept>

namespace optforge {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Capture {
  std::string text;
  std::size_t cap;
  bool truncated = false;

  void add(const char* data, std::size_t n) {
    if (text.size() >= cap) {
      truncated = true;
      return;
    }
    std::size_t room = cap - text.size();
    if (n > room) {
      truncated = true;
      n = room;
    }
    text.append(data, n);
  }
};

void split_timed_lines(const std::string& text, const std::vector<std::pair<std::size_t, double>>& stamps,
                       std::vector<TimedLine>& out) {
  // stamps: (byte offset of chunk start, arrival time). A line's timestamp is
  // the arrival time of the chunk that completed it (carried its '\n').
  std::size_t line_start = 0;
  std::size_t stamp_idx = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\n') continue;
    while (stamp_idx + 1 < stamps.size() && stamps[stamp_idx + 1].first <= i) ++stamp_idx;
    double at = stamps.empty() ? 0.0 : stamps[stamp_idx].second;
    std::string line = text.substr(line_start, i - line_start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back({at, std::move(line)});
    line_start = i + 1;
  }
  if (line_start < text.size()) {
    double at = stamps.empty() ? 0.0 : stamps.back().second;
    std::string line = text.substr(line_start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back({at, std::move(line)});
  }
}

}  // namespace

CommandResult run_command(const CommandSpec& spec) {
  CommandResult result;
  if (spec.argv.empty()) {
    result.start_failed = true;
    result.start_error = "empty argv";
    return result;
  }

  int out_pipe[2];
  int err_pipe[2];
  if (pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
    result.start_failed = true;
    result.start_error = std::strerror(errno);
    return result;
  }

  auto start = Clock::now();
  pid_t pid = fork();
  if (pid < 0) {
    result.start_failed = true;
    result.start_error = std::strerror(errno);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    return result;
  }

  if (pid == 0) {
    setpgid(0, 0);
    dup2(out_pipe[1], STDOUT_FILENO);
    dup2(err_pipe[1], STDERR_FILENO);
    for (int fd : {out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) close(fd);
    if (spec.cwd && chdir(spec.cwd->c_str()) != 0) _exit(127);
    std::vector<char*> argv;
    argv.reserve(spec.argv.size() + 1);
    for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    execvp(argv[0], argv.data());
    // Keep the failure reason visible to the parent through stderr.
    const char* msg = std::strerror(errno);
    (void)!write(STDERR_FILENO, "exec failed: ", 13);
    (void)!write(STDERR_FILENO, msg, std::strlen(msg));
    (void)!write(STDERR_FILENO, "\n", 1);
    _exit(127);
  }

  setpgid(pid, pid);  // also from the parent: closes the fork/exec race
  close(out_pipe[1]);
  close(err_pipe[1]);
  fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
  fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

  Capture out_cap{{}, spec.capture_cap_bytes};
  Capture err_cap{{}, spec.capture_cap_bytes};
  std::vector<std::pair<std::size_t, double>> out_stamps;

  bool out_open = true;
  bool err_open = true;
  bool killed = false;
  char buf[65536];

  while (out_open || err_open) {
    struct pollfd fds[2];
    nfds_t nfds = 0;
    int out_slot = -1;
    int err_slot = -1;
    if (out_open) {
      out_slot = static_cast<int>(nfds);
      fds[nfds++] = {out_pipe[0], POLLIN, 0};
    }
    if (err_open) {
      err_slot = static_cast<int>(nfds);
      fds[nfds++] = {err_pipe[0], POLLIN, 0};
    }

    int timeout_ms = 200;
    if (spec.timeout_seconds > 0.0 && !killed) {
      double remain = spec.timeout_seconds - seconds_since(start);
      if (remain <= 0.0) {
        kill(-pid, SIGKILL);
        killed = true;
        result.timed_out = true;
      } else {
        timeout_ms = static_cast<int>(remain * 1000.0) + 1;
        if (timeout_ms > 200) timeout_ms = 200;
      }
    }

    int rc = poll(fds, nfds, timeout_ms);
    if (rc < 0) {
      if (errno == EINTR) continue;
      break;
    }

    if (out_slot >= 0 && (fds[out_slot].revents & (POLLIN | POLLHUP))) {
      ssize_t n;
      while ((n = read(out_pipe[0], buf, sizeof buf)) > 0) {
        out_stamps.emplace_back(out_cap.text.size(), seconds_since(start));
        out_cap.add(buf, static_cast<std::size_t>(n));
      }
      if (n == 0) {
        out_open = false;
        close(out_pipe[0]);
      }
    }
    if (err_slot >= 0 && (fds[err_slot].revents & (POLLIN | POLLHUP))) {
      ssize_t n;
      while ((n = read(err_pipe[0], buf, sizeof buf)) > 0) {
        err_cap.add(buf, static_cast<std::size_t>(n));
      }
      if (n == 0) {
        err_open = false;
        close(err_pipe[0]);
      }
    }
  }

  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.wall_seconds = seconds_since(start);

  if (WIFEXITED(status)) {
    result.exited_normally = true;
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.term_signal = WTERMSIG(status);
  }
  result.stdout_text = std::move(out_cap.text);
  result.stderr_text = std::move(err_cap.text);
  if (result.exited_normally && result.exit_code == 127 &&
      result.stderr_text.rfind("exec failed: ", 0) == 0) {
    result.start_failed = true;
    result.start_error = result.stderr_text.substr(13);
    while (!result.start_error.empty() &&
           (result.start_error.back() == '\n' || result.start_error.back() == '\r')) {
      result.start_error.pop_back();
    }
  }
  split_timed_lines(result.stdout_text, out_stamps, result.stdout_lines);
  return result;
}

std::vector<std::string> render_command_template(
    const std::string& command_template,
    const std::vector<std::pair<std::string, std::string>>& substitutions) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < command_template.size()) {
    while (pos < command_template.size() &&
           (command_template[pos] == ' ' || command_template[pos] == '\t')) {
      ++pos;
    }
    if (pos >= command_template.size()) break;
    std::size_t end = pos;
    while (end < command_template.size() && command_template[end] != ' ' &&
           command_template[end] != '\t') {
      ++end;
    }
    tokens.push_back(command_template.substr(pos, end - pos));
    pos = end;
  }
  for (auto& token : tokens) {
    for (const auto& [key, value] : substitutions) {
      std::string needle = "{" + key + "}";
      std::size_t at;
      while ((at = token.find(needle)) != std::string::npos) {
        token.replace(at, needle.size(), value);
      }
    }
  }
  return tokens;
}

}  // namespace optforge
