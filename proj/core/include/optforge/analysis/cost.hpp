#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "optforge/trace.hpp"

namespace optforge {

struct PriceRow {
  std::string model;
  double input_per_1m = 0.0;   // dollars per million input tokens
  double output_per_1m = 0.0;  // dollars per million output tokens
};

/// Parses "model, input_per_1M, output_per_1M" lines. Blank lines and #
/// comments are skipped; a header line repeating the column names is
/// tolerated. Malformed rows are dropped and reported in `warnings`.
struct PriceTable {
  std::vector<PriceRow> rows;
  std::vector<std::string> warnings;
};
PriceTable parse_price_table(const std::string& text);

struct CostScenario {
  std::string model;
  double cost_total = 0.0;
  double cost_per_iteration = 0.0;
};

struct CostReport {
  std::int64_t iterations = 0;
  std::int64_t input_tokens = 0;   // strategist + implementor prompt tokens
  std::int64_t output_tokens = 0;  // completion tokens
  bool any_estimated = false;
  std::vector<CostScenario> scenarios;  // one per price row
};

/// Totals the trace's token ledger and prices it under every row of the
/// table.
CostReport cost_report(const Trace& trace, const PriceTable& prices);

struct TokenStat {
  std::string label;      // e.g. "strategist input"
  std::int64_t min = 0;   // per-iteration extremes
  std::int64_t max = 0;
  double avg = 0.0;
  double std_pct = 0.0;   // population stddev as percent of the mean
  double context_pct = 0.0;  // avg as percent of the context budget
};

/// Per-iteration token statistics for both agents and directions, measured
/// against `max_context` (input lanes only report context usage).
std::vector<TokenStat> token_stats(const Trace& trace, std::int64_t max_context = 128000);

struct CompileStats {
  std::int64_t code_producing = 0;
  std::int64_t first_compile_passed = 0;
  double first_pass_percent = 0.0;
  std::vector<std::pair<std::string, std::int64_t>> status_counts;  // by final status
};

/// Fraction of code-producing iterations whose first generated artifact
/// compiled. The first attempt's outcome is read from the implementor
/// transcript (the stage of the first feedback message); records without
/// feedback fall back to the final status.
CompileStats compile_stats(const Trace& trace);

}  // namespace optforge
