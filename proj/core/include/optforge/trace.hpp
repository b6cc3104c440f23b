#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace optforge {

enum class Strategy { Refine, Combine, Innovate, NotAvailable };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& text);

enum class ValidationStatus { Valid, CompileFailed, RunFailed, Incorrect, NoCode };

std::string to_string(ValidationStatus s);
ValidationStatus validation_status_from_string(const std::string& text);

struct ValidationOutcome {
  ValidationStatus status = ValidationStatus::NoCode;
  int attempts_used = 0;  // regenerations only; the initial generation is not counted
  std::optional<std::string> last_error;

  bool valid() const { return status == ValidationStatus::Valid; }
};

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
};

struct ConditionMetric {
  std::string condition;
  double mean_runtime = 0.0;  // seconds, arithmetic mean of the repetitions
  std::vector<double> repetition_runtimes;
};

struct TokenUsage {
  std::int64_t strategist_in = 0;
  std::int64_t strategist_out = 0;
  std::int64_t implementor_in = 0;
  std::int64_t implementor_out = 0;
  bool estimated = false;  // true when any count came from the bytes/4 fallback
};

/// One optimization iteration, as recorded in the design database.
struct DesignRecord {
  int iteration = 0;  // 1-based, strictly contiguous within a trace
  Strategy strategy = Strategy::NotAvailable;
  std::string instructions;
  std::optional<std::string> artifact;  // generated source; absent when no code was produced
  ValidationOutcome validation;
  std::vector<ConditionMetric> metrics;
  std::optional<double> score;  // present iff validation.status == Valid
  std::vector<ChatMessage> strategist_transcript;
  std::vector<ChatMessage> implementor_transcript;
  TokenUsage tokens;
  double wall_clock = 0.0;  // seconds

  bool produced_code() const { return artifact.has_value(); }
};

struct TraceHeader {
  std::string fingerprint;  // run-config fingerprint, see orchestrator
  int version = 1;
};

/// In-memory design database: the full ordered iteration history of one run.
struct Trace {
  std::optional<TraceHeader> header;
  std::vector<DesignRecord> records;

  int last_iteration() const {
    return records.empty() ? 0 : records.back().iteration;
  }
};

/// Appends a record, enforcing the trace invariants.
/// Throws std::invalid_argument on a non-contiguous iteration index, a
/// score/validity mismatch, or a last_error present on a valid record.
void append_record(Trace& trace, DesignRecord record);

/// The context slice shown to the Strategist: P top-scoring, Q bottom-scoring
/// and R most recent designs, deduplicated with priority top > bottom > recent.
struct CuratedContext {
  std::vector<DesignRecord> top;     // score descending, ties by lower iteration
  std::vector<DesignRecord> bottom;  // score ascending, ties by lower iteration
  std::vector<DesignRecord> recent;  // iteration descending
};

CuratedContext curate_context(const Trace& trace, int top_count, int bottom_count,
                              int recent_count);

/// Record with the highest score, if any record is valid.
const DesignRecord* best_record(const Trace& trace);

// --- serialization (line-delimited JSON; one record per line) ---

std::string record_to_json_line(const DesignRecord& record);
DesignRecord record_from_json_line(const std::string& line);
std::string header_to_json_line(const TraceHeader& header);
bool is_header_line(const std::string& line);
TraceHeader header_from_json_line(const std::string& line);

bool records_equal(const DesignRecord& a, const DesignRecord& b);

/// Durable append-only record log. One writer per file; readers open the file
/// independently and never observe partially written records (line-buffered,
/// flushed per append).
class TraceStore {
 public:
  /// Opens (or creates) the log at `path` and loads any existing content.
  explicit TraceStore(std::filesystem::path path);

  /// Writes the header line. Only legal while the file is empty.
  void write_header(const TraceHeader& header);

  /// Validates invariants, appends to memory and to disk, flushes.
  void append(const DesignRecord& record);

  const Trace& trace() const { return trace_; }
  const std::filesystem::path& path() const { return path_; }

  /// Pure read: parses a trace file without opening it for writing.
  static Trace read_file(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  Trace trace_;
};

}  // namespace optforge
