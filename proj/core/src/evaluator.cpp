#include "optforge/evaluator.hpp"

#include <atomic>
#include <cmath>
#include <sstream>

namespace optforge {

namespace {

std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::optional<double> measured_interval(const std::vector<TimedLine>& stdout_lines) {
  std::optional<double> begin;
  std::optional<double> end;
  for (const auto& line : stdout_lines) {
    std::string text = trim_copy(line.text);
    if (text == "MEASURE_BEGIN") {
      if (begin) return std::nullopt;  // duplicated
      begin = line.at_seconds;
    } else if (text == "MEASURE_END") {
      if (end || !begin) return std::nullopt;  // duplicated or out of order
      end = line.at_seconds;
    }
  }
  if (!begin || !end) return std::nullopt;
  double interval = *end - *begin;
  if (!(interval > 0.0)) return std::nullopt;
  return interval;
}

std::optional<double> score_from_metrics(const std::vector<ConditionMetric>& metrics) {
  if (metrics.empty()) return std::nullopt;
  double log_sum = 0.0;
  for (const auto& m : metrics) {
    if (!(m.mean_runtime > 0.0)) return std::nullopt;
    log_sum += std::log(m.mean_runtime);
  }
  return -std::exp(log_sum / static_cast<double>(metrics.size()));
}

EvaluationResult evaluate_candidate(const std::filesystem::path& binary,
                                    const std::vector<EvalCondition>& conditions,
                                    const EvaluatorConfig& config,
                                    const std::filesystem::path& work_root) {
  static std::atomic<std::uint64_t> counter{0};
  EvaluationResult result;
  for (const auto& condition : conditions) {
    ConditionMetric metric;
    metric.condition = condition.name;
    for (int rep = 0; rep < config.repetitions; ++rep) {
      auto rep_dir = std::filesystem::absolute(
          work_root / ("eval-" + std::to_string(counter.fetch_add(1))));
      std::filesystem::create_directories(rep_dir);
      auto input_path = rep_dir / "input.txt";
      auto output_path = rep_dir / "output.txt";
      write_table(input_path, condition.input);

      CommandSpec spec;
      spec.argv = {binary.string(), input_path.string(), output_path.string()};
      spec.cwd = rep_dir;
      spec.timeout_seconds = config.run_timeout_seconds;
      auto run = run_command(spec);
      if (!run.ok()) {
        std::ostringstream msg;
        msg << "condition " << condition.name << " rep " << rep << ": ";
        if (run.timed_out) {
          msg << "timed out after " << run.wall_seconds << " s";
        } else if (run.start_failed) {
          msg << "failed to start: " << run.start_error;
        } else if (!run.exited_normally) {
          msg << "killed by signal " << run.term_signal;
        } else {
          msg << "exited with code " << run.exit_code;
        }
        if (!run.stderr_text.empty()) msg << "\nstderr:\n" << run.stderr_text;
        result.failure = msg.str();
        return result;
      }

      auto interval = measured_interval(run.stdout_lines);
      if (interval) {
        metric.repetition_runtimes.push_back(*interval);
      } else {
        metric.repetition_runtimes.push_back(run.wall_seconds);
        result.used_wall_clock_fallback = true;
      }
    }
    double sum = 0.0;
    for (double r : metric.repetition_runtimes) sum += r;
    metric.mean_runtime = sum / static_cast<double>(metric.repetition_runtimes.size());
    result.metrics.push_back(std::move(metric));
  }
  result.score = score_from_metrics(result.metrics);
  if (!result.score) result.failure = "non-positive measured runtime";
  return result;
}

}  // namespace optforge
