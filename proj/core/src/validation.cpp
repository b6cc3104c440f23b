#include "optforge/validation.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

#include "optforge/subprocess.hpp"

namespace optforge {

namespace {

std::filesystem::path fresh_dir(const std::filesystem::path& root, const std::string& tag) {
  static std::atomic<std::uint64_t> counter{0};
  std::filesystem::create_directories(root);
  for (;;) {
    auto dir = root / (tag + "-" + std::to_string(counter.fetch_add(1)));
    std::error_code ec;
    if (std::filesystem::create_directory(dir, ec)) return dir;
    if (ec && ec != std::errc::file_exists) {
      throw std::runtime_error("cannot create work directory " + dir.string() + ": " +
                               ec.message());
    }
  }
}

std::string describe_run_failure(const CommandResult& result) {
  std::ostringstream out;
  if (result.start_failed) {
    out << "failed to start: " << result.start_error;
  } else if (result.timed_out) {
    out << "timed out after " << result.wall_seconds << " s";
  } else if (!result.exited_normally) {
    out << "killed by signal " << result.term_signal;
  } else {
    out << "exited with code " << result.exit_code;
  }
  if (!result.stderr_text.empty()) out << "\nstderr:\n" << result.stderr_text;
  if (!result.stdout_text.empty()) out << "\nstdout:\n" << result.stdout_text;
  return out.str();
}

}  // namespace

std::string truncate_diagnostics(const std::string& text, std::size_t cap) {
  if (text.size() <= cap) return text;
  static const std::string kMarker = "\n[truncated]";
  if (cap <= kMarker.size()) return text.substr(0, cap);
  return text.substr(0, cap - kMarker.size()) + kMarker;
}

CompareResult compare_tables(const Table& expected, const Table& actual, double tolerance) {
  CompareResult out;
  if (expected.size() != actual.size()) {
    out.message = "row count mismatch: expected " + std::to_string(expected.size()) +
                  ", got " + std::to_string(actual.size());
    return out;
  }
  for (std::size_t r = 0; r < expected.size(); ++r) {
    if (expected[r].size() != actual[r].size()) {
      out.message = "row " + std::to_string(r) + " length mismatch: expected " +
                    std::to_string(expected[r].size()) + ", got " +
                    std::to_string(actual[r].size());
      return out;
    }
    for (std::size_t c = 0; c < expected[r].size(); ++c) {
      double want = expected[r][c];
      double got = actual[r][c];
      double err = std::abs(got - want);
      double rel = want != 0.0 ? err / std::abs(want) : err;
      if (!(rel <= tolerance)) {
        std::ostringstream msg;
        msg << "mismatch at row " << r << " col " << c << ": got " << format_double(got)
            << ", expected " << format_double(want) << " (relative error "
            << format_double(rel) << ")";
        out.message = msg.str();
        return out;
      }
    }
  }
  out.passed = true;
  return out;
}

ValidationReport validate_candidate(const std::string& source,
                                    const std::vector<CorrectnessCase>& cases,
                                    const ValidationConfig& config,
                                    const std::filesystem::path& work_root) {
  ValidationReport report;
  // Children run with cwd inside the work tree, so every path handed to them
  // must be absolute even when the caller's work_root is relative.
  auto attempt_dir = std::filesystem::absolute(fresh_dir(work_root, "attempt"));
  auto source_path = attempt_dir / "candidate.cpp";
  auto binary_path = attempt_dir / "candidate";
  write_text_file(source_path, source);

  CommandSpec compile;
  compile.argv = render_command_template(
      config.compile_command,
      {{"source", source_path.string()}, {"binary", binary_path.string()}});
  compile.timeout_seconds = config.compile_timeout_seconds;
  compile.cwd = attempt_dir;
  auto compile_result = run_command(compile);
  if (compile.argv.empty() || compile_result.start_failed) {
    throw std::runtime_error("toolchain unavailable: " +
                             (compile.argv.empty() ? "empty compile command"
                                                   : compile_result.start_error));
  }
  if (!compile_result.ok()) {
    report.status = ValidationStatus::CompileFailed;
    report.first_failure_stage = "compile";
    report.compile.passed = false;
    report.compile.diagnostics = truncate_diagnostics(
        compile_result.stderr_text + compile_result.stdout_text, config.diagnostics_cap_bytes);
    report.diagnostics = report.compile.diagnostics;
    return report;
  }
  report.compile.passed = true;
  report.binary = binary_path;

  for (const auto& test_case : cases) {
    auto case_dir = fresh_dir(attempt_dir, "case-" + test_case.name);
    auto input_path = case_dir / "input.txt";
    auto output_path = case_dir / "output.txt";
    write_table(input_path, test_case.input);

    CommandSpec run;
    run.argv = {binary_path.string(), input_path.string(), output_path.string()};
    run.cwd = case_dir;
    run.timeout_seconds = config.run_timeout_seconds;
    auto run_result = run_command(run);

    StageReport stage;
    if (!run_result.ok()) {
      stage.diagnostics = truncate_diagnostics(
          "case " + test_case.name + ": " + describe_run_failure(run_result),
          config.diagnostics_cap_bytes);
      report.cases.push_back(stage);
      report.status = ValidationStatus::RunFailed;
      report.first_failure_stage = "run";
      report.diagnostics = stage.diagnostics;
      return report;
    }

    Table produced;
    try {
      produced = read_table(output_path);
    } catch (const std::exception& e) {
      stage.diagnostics = truncate_diagnostics(
          "case " + test_case.name + ": output unreadable: " + e.what(),
          config.diagnostics_cap_bytes);
      report.cases.push_back(stage);
      report.status = ValidationStatus::Incorrect;
      report.first_failure_stage = "correctness";
      report.diagnostics = stage.diagnostics;
      return report;
    }
    auto cmp = compare_tables(test_case.expected, produced, test_case.tolerance);
    if (!cmp.passed) {
      stage.diagnostics = truncate_diagnostics("case " + test_case.name + ": " + cmp.message,
                                               config.diagnostics_cap_bytes);
      report.cases.push_back(stage);
      report.status = ValidationStatus::Incorrect;
      report.first_failure_stage = "correctness";
      report.diagnostics = stage.diagnostics;
      return report;
    }
    stage.passed = true;
    report.cases.push_back(stage);
  }

  report.status = ValidationStatus::Valid;
  return report;
}

}  // namespace optforge
