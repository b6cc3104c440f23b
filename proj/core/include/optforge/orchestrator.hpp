#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include "optforge/chat.hpp"
#include "optforge/problems.hpp"
#include "optforge/trace.hpp"
#include "optforge/validation.hpp"

namespace optforge {

struct RunConfig {
  std::string problem = "kinetics";
  std::int64_t iterations = 10;
  std::int64_t top_k = 4;      // P
  std::int64_t bottom_k = 3;   // Q
  std::int64_t recent_k = 3;   // R
  std::int64_t max_fix_attempts = 4;  // K feedback rounds per iteration
  std::int64_t innovate_priority_until = 10;
  std::uint64_t seed = 0;
  bool full_scale = false;
  int repetitions = 3;
  double run_timeout_seconds = 60.0;
  double compile_timeout_seconds = 120.0;
  double temperature = 0.7;
  std::optional<std::string> sketch;  // replaces the pack sketches when set
  std::string hints;
  AgentEndpoint strategist;
  AgentEndpoint implementor;
  std::optional<std::string> api_key;
  std::string compile_command;  // template with {source} and {binary}
};

/// Reads a JSON config file. Unknown keys are rejected; OPTFORGE_CHAT_BASE_URL
/// and OPTFORGE_CHAT_API_KEY override both endpoints when set.
RunConfig load_run_config(const std::filesystem::path& file);

/// Stable hash of the semantically relevant fields, recorded in the trace
/// header and checked on resume.
std::string config_fingerprint(const RunConfig& config);

struct RunPaths {
  std::filesystem::path trace_file;
  std::filesystem::path work_root;  // scratch tree for builds and runs
};

struct RunSummary {
  std::int64_t iterations_completed = 0;
  std::int64_t valid_designs = 0;
  std::optional<DesignRecord> best;
};

using RecordObserver = std::function<void(const DesignRecord&)>;

/// Runs the strategize/implement/validate/evaluate loop until
/// config.iterations records exist in the trace. With resume=true the
/// existing trace is loaded, its fingerprint checked, and the loop continues
/// after the last recorded iteration; otherwise the trace file must not
/// already exist. Every iteration appends exactly one record, code or not.
RunSummary run_optimization(const RunConfig& config, const RunPaths& paths, bool resume,
                            const RecordObserver& observer = {});

/// Scripted-backend ordinal a resumed run must start at, reconstructed from
/// the records already in the trace: one strategist call per iteration that
/// consulted the strategist, and 1 + attempts_used implementor calls per
/// iteration that reached the implementor.
std::size_t strategist_ordinal_after(const Trace& trace);
std::size_t implementor_ordinal_after(const Trace& trace);

}  // namespace optforge
