#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "optforge/dataio.hpp"
#include "optforge/trace.hpp"

namespace optforge {

/// One correctness case: a candidate is fed `input` and its output is
/// compared element-wise against `expected` under `tolerance` (max relative
/// error; absolute where the expected value is zero).
struct CorrectnessCase {
  std::string name;
  Table input;
  Table expected;
  double tolerance = 1e-6;
};

struct StageReport {
  bool passed = false;
  std::string diagnostics;  // truncated to diagnostics_cap_bytes
};

struct ValidationConfig {
  std::string compile_command;  // template with {source} and {binary}
  double compile_timeout_seconds = 120.0;
  double run_timeout_seconds = 60.0;
  std::size_t diagnostics_cap_bytes = 16 * 1024;
};

struct ValidationReport {
  ValidationStatus status = ValidationStatus::NoCode;
  StageReport compile;
  std::vector<StageReport> cases;  // one per correctness case, in order
  std::string first_failure_stage;  // "compile", "run", "correctness", "" if passed
  std::string diagnostics;          // diagnostics of the first failing stage
  std::optional<std::filesystem::path> binary;  // built artifact when compile passed
};

/// Writes `source` into a fresh directory under `work_root`, compiles it, and
/// runs every correctness case hermetically (inputs are copied in, the
/// candidate is invoked as `binary <input-file> <output-file>`). Stops at the
/// first failing stage.
ValidationReport validate_candidate(const std::string& source,
                                    const std::vector<CorrectnessCase>& cases,
                                    const ValidationConfig& config,
                                    const std::filesystem::path& work_root);

/// Element-wise comparison shared by validation and gen-truth checks: passes
/// iff every |got - expected| / max(|expected|, via absolute fallback at 0)
/// stays within the tolerance. Shapes must match exactly; the message names
/// the first offending position with got/expected values.
struct CompareResult {
  bool passed = false;
  std::string message;
};
CompareResult compare_tables(const Table& expected, const Table& actual, double tolerance);

/// Truncates diagnostics to `cap` bytes, appending a marker when cut.
std::string truncate_diagnostics(const std::string& text, std::size_t cap);

}  // namespace optforge
