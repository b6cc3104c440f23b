#include "optforge/analysis/cost.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "optforge/agents.hpp"

namespace optforge {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

bool parse_number(const std::string& text, double* out) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) return false;
    *out = v;
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

struct Lane {
  std::string label;
  bool input = false;
  std::vector<std::int64_t> values;
};

void lane_stats(const Lane& lane, std::int64_t max_context, std::vector<TokenStat>* out) {
  TokenStat stat;
  stat.label = lane.label;
  if (lane.values.empty()) {
    out->push_back(stat);
    return;
  }
  std::int64_t lo = lane.values.front();
  std::int64_t hi = lane.values.front();
  double sum = 0.0;
  for (std::int64_t v : lane.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += static_cast<double>(v);
  }
  double n = static_cast<double>(lane.values.size());
  double mean = sum / n;
  double var = 0.0;
  for (std::int64_t v : lane.values) {
    double d = static_cast<double>(v) - mean;
    var += d * d;
  }
  var /= n;
  stat.min = lo;
  stat.max = hi;
  stat.avg = mean;
  stat.std_pct = mean != 0.0 ? 100.0 * std::sqrt(var) / mean : 0.0;
  if (lane.input && max_context > 0) {
    stat.context_pct = 100.0 * mean / static_cast<double>(max_context);
  }
  out->push_back(stat);
}

}  // namespace

PriceTable parse_price_table(const std::string& text) {
  PriceTable table;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<std::string> fields = split_fields(t);
    if (fields.size() != 3) {
      table.warnings.push_back("line " + std::to_string(line_no) + ": expected 3 comma-separated fields, got " +
                               std::to_string(fields.size()));
      continue;
    }
    PriceRow row;
    row.model = fields[0];
    if (!parse_number(fields[1], &row.input_per_1m) || !parse_number(fields[2], &row.output_per_1m)) {
      if (lower(fields[0]) == "model") continue;
      table.warnings.push_back("line " + std::to_string(line_no) + ": unparsable price in row for '" + fields[0] +
                               "'");
      continue;
    }
    if (row.model.empty()) {
      table.warnings.push_back("line " + std::to_string(line_no) + ": empty model name");
      continue;
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

CostReport cost_report(const Trace& trace, const PriceTable& prices) {
  CostReport report;
  report.iterations = static_cast<std::int64_t>(trace.records.size());
  for (const DesignRecord& record : trace.records) {
    report.input_tokens += record.tokens.strategist_in + record.tokens.implementor_in;
    report.output_tokens += record.tokens.strategist_out + record.tokens.implementor_out;
    report.any_estimated = report.any_estimated || record.tokens.estimated;
  }
  for (const PriceRow& row : prices.rows) {
    CostScenario scenario;
    scenario.model = row.model;
    scenario.cost_total = (static_cast<double>(report.input_tokens) * row.input_per_1m +
                           static_cast<double>(report.output_tokens) * row.output_per_1m) /
                          1e6;
    scenario.cost_per_iteration =
        report.iterations > 0 ? scenario.cost_total / static_cast<double>(report.iterations) : 0.0;
    report.scenarios.push_back(std::move(scenario));
  }
  return report;
}

std::vector<TokenStat> token_stats(const Trace& trace, std::int64_t max_context) {
  Lane lanes[4] = {
      {"strategist input", true, {}},
      {"strategist output", false, {}},
      {"implementor input", true, {}},
      {"implementor output", false, {}},
  };
  for (const DesignRecord& record : trace.records) {
    lanes[0].values.push_back(record.tokens.strategist_in);
    lanes[1].values.push_back(record.tokens.strategist_out);
    lanes[2].values.push_back(record.tokens.implementor_in);
    lanes[3].values.push_back(record.tokens.implementor_out);
  }
  std::vector<TokenStat> stats;
  for (const Lane& lane : lanes) lane_stats(lane, max_context, &stats);
  return stats;
}

CompileStats compile_stats(const Trace& trace) {
  CompileStats stats;
  std::vector<std::pair<std::string, std::int64_t>> counts = {
      {to_string(ValidationStatus::Valid), 0},          {to_string(ValidationStatus::CompileFailed), 0},
      {to_string(ValidationStatus::RunFailed), 0},      {to_string(ValidationStatus::Incorrect), 0},
      {to_string(ValidationStatus::NoCode), 0},
  };
  for (const DesignRecord& record : trace.records) {
    std::string status = to_string(record.validation.status);
    for (auto& entry : counts) {
      if (entry.first == status) ++entry.second;
    }
    if (!record.produced_code()) continue;
    ++stats.code_producing;

    // The stage of the first feedback message tells us how the first
    // artifact failed; no feedback at all means it validated cleanly.
    bool saw_assistant = false;
    std::string first_stage;
    bool found_feedback = false;
    for (const ChatMessage& message : record.implementor_transcript) {
      if (message.role == "assistant") {
        saw_assistant = true;
        continue;
      }
      if (saw_assistant && message.role == "user") {
        first_stage = feedback_stage(message.content);
        found_feedback = true;
        break;
      }
    }
    bool passed;
    if (found_feedback && !first_stage.empty()) {
      passed = first_stage != "compile";
    } else {
      passed = record.validation.status != ValidationStatus::CompileFailed;
    }
    if (passed) ++stats.first_compile_passed;
  }
  stats.first_pass_percent =
      stats.code_producing > 0
          ? 100.0 * static_cast<double>(stats.first_compile_passed) / static_cast<double>(stats.code_producing)
          : 0.0;
  stats.status_counts = std::move(counts);
  return stats;
}

}  // namespace optforge
