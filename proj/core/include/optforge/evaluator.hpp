#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "optforge/dataio.hpp"
#include "optforge/subprocess.hpp"
#include "optforge/trace.hpp"

namespace optforge {

/// One benchmark condition: named input the candidate is timed on.
struct EvalCondition {
  std::string name;
  Table input;
};

struct EvaluatorConfig {
  int repetitions = 3;
  double run_timeout_seconds = 60.0;
};

struct EvaluationResult {
  std::vector<ConditionMetric> metrics;     // one per condition, in order
  std::optional<double> score;              // -geomean of condition means
  bool used_wall_clock_fallback = false;    // any rep lacked usable markers
  std::string failure;                      // non-empty when a rep failed outright
  bool ok() const { return failure.empty(); }
};

/// Runs `binary` over every condition `repetitions` times in hermetic
/// scratch directories. Per-repetition runtime comes from the candidate's
/// MEASURE_BEGIN/MEASURE_END stdout markers (arrival-time difference); when
/// either marker is missing, duplicated out of order, or the difference is
/// not positive, the repetition falls back to full wall-clock time and the
/// result is flagged.
EvaluationResult evaluate_candidate(const std::filesystem::path& binary,
                                    const std::vector<EvalCondition>& conditions,
                                    const EvaluatorConfig& config,
                                    const std::filesystem::path& work_root);

/// Marker extraction on its own, for tests: returns the measured interval in
/// seconds or nullopt when the markers cannot be trusted.
std::optional<double> measured_interval(const std::vector<TimedLine>& stdout_lines);

/// score = -(prod_i mean_i)^(1/n); requires every mean to be positive.
std::optional<double> score_from_metrics(const std::vector<ConditionMetric>& metrics);

}  // namespace optforge
