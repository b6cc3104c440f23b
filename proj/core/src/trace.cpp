#include "optforge/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace optforge {

using nlohmann::json;

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::Refine: return "refine";
    case Strategy::Combine: return "combine";
    case Strategy::Innovate: return "innovate";
    case Strategy::NotAvailable: return "not-available";
  }
  throw std::logic_error("unreachable strategy");
}

Strategy strategy_from_string(const std::string& text) {
  if (text == "refine") return Strategy::Refine;
  if (text == "combine") return Strategy::Combine;
  if (text == "innovate") return Strategy::Innovate;
  if (text == "not-available") return Strategy::NotAvailable;
  throw std::invalid_argument("unknown strategy: " + text);
}

std::string to_string(ValidationStatus s) {
  switch (s) {
    case ValidationStatus::Valid: return "valid";
    case ValidationStatus::CompileFailed: return "compile-failed";
    case ValidationStatus::RunFailed: return "run-failed";
    case ValidationStatus::Incorrect: return "incorrect";
    case ValidationStatus::NoCode: return "no-code";
  }
  throw std::logic_error("unreachable status");
}

ValidationStatus validation_status_from_string(const std::string& text) {
  if (text == "valid") return ValidationStatus::Valid;
  if (text == "compile-failed") return ValidationStatus::CompileFailed;
  if (text == "run-failed") return ValidationStatus::RunFailed;
  if (text == "incorrect") return ValidationStatus::Incorrect;
  if (text == "no-code") return ValidationStatus::NoCode;
  throw std::invalid_argument("unknown validation status: " + text);
}

namespace {

void check_record(const Trace& trace, const DesignRecord& record) {
  if (record.iteration != trace.last_iteration() + 1) {
    throw std::invalid_argument(
        "non-contiguous iteration index " + std::to_string(record.iteration) +
        " after " + std::to_string(trace.last_iteration()));
  }
  bool valid = record.validation.status == ValidationStatus::Valid;
  if (record.score.has_value() != valid) {
    throw std::invalid_argument("score must be present exactly for valid records");
  }
  if (valid && record.validation.last_error.has_value()) {
    throw std::invalid_argument("valid record must not carry last_error");
  }
  if ((record.validation.status == ValidationStatus::NoCode) == record.artifact.has_value()) {
    throw std::invalid_argument("artifact must be present exactly for code-producing records");
  }
  if (record.validation.attempts_used < 0) {
    throw std::invalid_argument("attempts_used must be non-negative");
  }
}

}  // namespace

void append_record(Trace& trace, DesignRecord record) {
  check_record(trace, record);
  trace.records.push_back(std::move(record));
}

namespace {

bool better_score(const DesignRecord& a, const DesignRecord& b) {
  // Higher score wins; ties go to the earlier iteration.
  if (*a.score != *b.score) return *a.score > *b.score;
  return a.iteration < b.iteration;
}

}  // namespace

CuratedContext curate_context(const Trace& trace, int top_count, int bottom_count,
                              int recent_count) {
  if (top_count < 0 || bottom_count < 0 || recent_count < 0) {
    throw std::invalid_argument("curation counts must be non-negative");
  }
  CuratedContext out;
  std::vector<const DesignRecord*> valid;
  for (const auto& r : trace.records) {
    if (r.validation.valid()) valid.push_back(&r);
  }

  std::vector<const DesignRecord*> by_score(valid);
  std::sort(by_score.begin(), by_score.end(),
            [](const DesignRecord* a, const DesignRecord* b) { return better_score(*a, *b); });

  std::set<int> taken;
  for (const auto* r : by_score) {
    if (static_cast<int>(out.top.size()) >= top_count) break;
    out.top.push_back(*r);
    taken.insert(r->iteration);
  }
  std::vector<const DesignRecord*> by_score_asc(valid);
  std::sort(by_score_asc.begin(), by_score_asc.end(),
            [](const DesignRecord* a, const DesignRecord* b) {
              if (*a->score != *b->score) return *a->score < *b->score;
              return a->iteration < b->iteration;
            });
  for (const auto* r : by_score_asc) {
    if (static_cast<int>(out.bottom.size()) >= bottom_count) break;
    if (taken.count(r->iteration)) continue;
    out.bottom.push_back(*r);
    taken.insert(r->iteration);
  }
  for (auto it = trace.records.rbegin(); it != trace.records.rend(); ++it) {
    if (static_cast<int>(out.recent.size()) >= recent_count) break;
    if (taken.count(it->iteration)) continue;
    out.recent.push_back(*it);
    taken.insert(it->iteration);
  }
  return out;
}

const DesignRecord* best_record(const Trace& trace) {
  const DesignRecord* best = nullptr;
  for (const auto& r : trace.records) {
    if (!r.validation.valid()) continue;
    if (!best || better_score(r, *best)) best = &r;
  }
  return best;
}

namespace {

json messages_to_json(const std::vector<ChatMessage>& messages) {
  json arr = json::array();
  for (const auto& m : messages) arr.push_back({{"role", m.role}, {"content", m.content}});
  return arr;
}

std::vector<ChatMessage> messages_from_json(const json& arr) {
  std::vector<ChatMessage> out;
  for (const auto& m : arr) {
    out.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  return out;
}

}  // namespace

std::string record_to_json_line(const DesignRecord& record) {
  json j;
  j["iteration"] = record.iteration;
  j["strategy"] = to_string(record.strategy);
  j["instructions"] = record.instructions;
  if (record.artifact) j["artifact"] = *record.artifact;
  json v;
  v["status"] = to_string(record.validation.status);
  v["attempts_used"] = record.validation.attempts_used;
  if (record.validation.last_error) v["last_error"] = *record.validation.last_error;
  j["validation"] = v;
  json metrics = json::array();
  for (const auto& m : record.metrics) {
    metrics.push_back({{"condition", m.condition},
                       {"mean_runtime", m.mean_runtime},
                       {"repetitions", m.repetition_runtimes}});
  }
  j["metrics"] = metrics;
  if (record.score) j["score"] = *record.score;
  j["transcripts"] = {{"strategist", messages_to_json(record.strategist_transcript)},
                      {"implementor", messages_to_json(record.implementor_transcript)}};
  j["tokens"] = {{"strategist_in", record.tokens.strategist_in},
                 {"strategist_out", record.tokens.strategist_out},
                 {"implementor_in", record.tokens.implementor_in},
                 {"implementor_out", record.tokens.implementor_out},
                 {"estimated", record.tokens.estimated}};
  j["wall_clock"] = record.wall_clock;
  return j.dump();
}

DesignRecord record_from_json_line(const std::string& line) {
  json j = json::parse(line);
  DesignRecord r;
  r.iteration = j.at("iteration").get<int>();
  r.strategy = strategy_from_string(j.at("strategy").get<std::string>());
  r.instructions = j.at("instructions").get<std::string>();
  if (j.contains("artifact") && !j["artifact"].is_null()) {
    r.artifact = j["artifact"].get<std::string>();
  }
  const json& v = j.at("validation");
  r.validation.status = validation_status_from_string(v.at("status").get<std::string>());
  r.validation.attempts_used = v.at("attempts_used").get<int>();
  if (v.contains("last_error") && !v["last_error"].is_null()) {
    r.validation.last_error = v["last_error"].get<std::string>();
  }
  for (const auto& m : j.at("metrics")) {
    ConditionMetric cm;
    cm.condition = m.at("condition").get<std::string>();
    cm.mean_runtime = m.at("mean_runtime").get<double>();
    cm.repetition_runtimes = m.at("repetitions").get<std::vector<double>>();
    r.metrics.push_back(std::move(cm));
  }
  if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<double>();
  const json& t = j.at("transcripts");
  r.strategist_transcript = messages_from_json(t.at("strategist"));
  r.implementor_transcript = messages_from_json(t.at("implementor"));
  const json& tok = j.at("tokens");
  r.tokens.strategist_in = tok.at("strategist_in").get<std::int64_t>();
  r.tokens.strategist_out = tok.at("strategist_out").get<std::int64_t>();
  r.tokens.implementor_in = tok.at("implementor_in").get<std::int64_t>();
  r.tokens.implementor_out = tok.at("implementor_out").get<std::int64_t>();
  r.tokens.estimated = tok.at("estimated").get<bool>();
  r.wall_clock = j.at("wall_clock").get<double>();
  return r;
}

std::string header_to_json_line(const TraceHeader& header) {
  json j;
  j["trace_header"] = {{"fingerprint", header.fingerprint}, {"version", header.version}};
  return j.dump();
}

bool is_header_line(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  return j.is_object() && j.contains("trace_header");
}

TraceHeader header_from_json_line(const std::string& line) {
  json j = json::parse(line);
  const json& h = j.at("trace_header");
  TraceHeader out;
  out.fingerprint = h.at("fingerprint").get<std::string>();
  out.version = h.at("version").get<int>();
  return out;
}

namespace {

bool messages_equal(const std::vector<ChatMessage>& a, const std::vector<ChatMessage>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].role != b[i].role || a[i].content != b[i].content) return false;
  }
  return true;
}

}  // namespace

bool records_equal(const DesignRecord& a, const DesignRecord& b) {
  if (a.iteration != b.iteration || a.strategy != b.strategy ||
      a.instructions != b.instructions || a.artifact != b.artifact) {
    return false;
  }
  if (a.validation.status != b.validation.status ||
      a.validation.attempts_used != b.validation.attempts_used ||
      a.validation.last_error != b.validation.last_error) {
    return false;
  }
  if (a.metrics.size() != b.metrics.size()) return false;
  for (std::size_t i = 0; i < a.metrics.size(); ++i) {
    if (a.metrics[i].condition != b.metrics[i].condition ||
        a.metrics[i].mean_runtime != b.metrics[i].mean_runtime ||
        a.metrics[i].repetition_runtimes != b.metrics[i].repetition_runtimes) {
      return false;
    }
  }
  if (a.score != b.score) return false;
  if (!messages_equal(a.strategist_transcript, b.strategist_transcript)) return false;
  if (!messages_equal(a.implementor_transcript, b.implementor_transcript)) return false;
  if (a.tokens.strategist_in != b.tokens.strategist_in ||
      a.tokens.strategist_out != b.tokens.strategist_out ||
      a.tokens.implementor_in != b.tokens.implementor_in ||
      a.tokens.implementor_out != b.tokens.implementor_out ||
      a.tokens.estimated != b.tokens.estimated) {
    return false;
  }
  return a.wall_clock == b.wall_clock;
}

TraceStore::TraceStore(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) trace_ = read_file(path_);
}

void TraceStore::write_header(const TraceHeader& header) {
  if (trace_.header || !trace_.records.empty()) {
    throw std::logic_error("trace header must be written before any record");
  }
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open trace for writing: " + path_.string());
  out << header_to_json_line(header) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("trace write failed: " + path_.string());
  trace_.header = header;
}

void TraceStore::append(const DesignRecord& record) {
  check_record(trace_, record);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw std::runtime_error("cannot open trace for writing: " + path_.string());
  out << record_to_json_line(record) << '\n';
  out.flush();
  if (!out) throw std::runtime_error("trace write failed: " + path_.string());
  trace_.records.push_back(record);
}

Trace TraceStore::read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path.string());
  Trace trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      if (line_no == 1 && is_header_line(line)) {
        trace.header = header_from_json_line(line);
        continue;
      }
      append_record(trace, record_from_json_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return trace;
}

}  // namespace optforge
