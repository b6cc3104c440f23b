#include "optforge/agents.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "optforge/dataio.hpp"

namespace optforge {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

// Matches a "<label>: value" line, tolerating leading markdown decoration
// (#, *, -, >) around the label. Returns the text after the colon, or
// nullopt when the line does not carry the label.
std::optional<std::string> labeled_line_value(const std::string& line, const std::string& label) {
  std::string low = lower(line);
  std::size_t pos = low.find(label);
  if (pos == std::string::npos) return std::nullopt;
  for (std::size_t i = 0; i < pos; ++i) {
    char c = low[i];
    if (c != ' ' && c != '\t' && c != '#' && c != '*' && c != '-' && c != '>') {
      return std::nullopt;
    }
  }
  std::size_t after = pos + label.size();
  while (after < low.size() && (low[after] == ' ' || low[after] == '*')) ++after;
  if (after >= low.size() || low[after] != ':') return std::nullopt;
  std::size_t start = after + 1;
  while (start < line.size() && (line[start] == ' ' || line[start] == '*')) ++start;
  return line.substr(start);
}

std::optional<Strategy> strategy_word(const std::string& value) {
  std::string word;
  for (char c : lower(value)) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      word.push_back(c);
    } else if (!word.empty()) {
      break;
    }
  }
  if (word == "refine") return Strategy::Refine;
  if (word == "combine") return Strategy::Combine;
  if (word == "innovate") return Strategy::Innovate;
  return std::nullopt;
}

}  // namespace

StrategistDecision parse_strategist_reply(const std::string& reply) {
  StrategistDecision decision;
  decision.raw_response = reply;
  decision.instructions = trim(reply);

  auto lines = split_lines(reply);
  std::optional<std::size_t> strategy_line;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto value = labeled_line_value(lines[i], "strategy");
    if (!value) continue;
    auto parsed = strategy_word(*value);
    if (!parsed) continue;
    decision.strategy = *parsed;
    strategy_line = i;
    break;
  }
  if (!strategy_line) return decision;

  std::optional<std::size_t> instructions_line;
  std::string first_chunk;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto value = labeled_line_value(lines[i], "instructions");
    if (!value) continue;
    instructions_line = i;
    first_chunk = *value;
    break;
  }

  std::ostringstream body;
  if (instructions_line) {
    body << first_chunk;
    for (std::size_t i = *instructions_line + 1; i < lines.size(); ++i) {
      body << '\n' << lines[i];
    }
  } else {
    for (std::size_t i = *strategy_line + 1; i < lines.size(); ++i) {
      if (i > *strategy_line + 1) body << '\n';
      body << lines[i];
    }
  }
  decision.instructions = trim(body.str());
  return decision;
}

std::string render_decision(const StrategistDecision& decision) {
  return "STRATEGY: " + to_string(decision.strategy) + "\nINSTRUCTIONS: " +
         decision.instructions + "\n";
}

std::optional<std::string> extract_code_block(const std::string& reply) {
  auto lines = split_lines(reply);
  std::optional<std::size_t> open;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).rfind("```", 0) != 0) continue;
    if (!open) {
      open = i;
      continue;
    }
    std::ostringstream body;
    for (std::size_t j = *open + 1; j < i; ++j) body << lines[j] << '\n';
    return body.str();
  }
  return std::nullopt;
}

namespace {

constexpr const char* kReplyFormat =
    "Reply with exactly two sections:\n"
    "STRATEGY: one of refine, combine, innovate\n"
    "INSTRUCTIONS: detailed implementation instructions for the Implementor\n";

constexpr const char* kSelectionGuidelines =
    "Pick the strategy by these rules:\n"
    "- innovate: most known designs look alike in structure and score, a genuinely "
    "different approach could unlock a large gain, or recent attempts keep failing "
    "constraints without an evident fix.\n"
    "- combine: several designs are strong along different dimensions, hybrids could "
    "capture complementary benefits, or distinct patterns deserve merging into one "
    "design.\n"
    "- refine: one design is close to a breakthrough, a specific fixable bottleneck is "
    "identified, a constraint failure is minor and correctable, or a sound core design "
    "needs tuning.\n"
    "Write concrete, specific instructions naming exact parameters and mechanisms (say "
    "\"use 32x32 tiles held in a local buffer, column-major\" rather than \"improve "
    "memory access\"). Apply the optimization hints when they fit. Weigh whether the "
    "constraints and the projected improvement are actually attainable.\n";

constexpr const char* kInnovatePriority =
    "Early-phase directive: prioritize the innovate strategy for now so the design "
    "landscape gets explored broadly before committing to local improvements.\n";

void render_records(std::ostringstream& out, const char* title,
                    const std::vector<DesignRecord>& records) {
  if (records.empty()) return;
  out << title << "\n";
  for (const auto& r : records) {
    out << "[design iteration=" << r.iteration << " strategy=" << to_string(r.strategy)
        << " status=" << to_string(r.validation.status);
    if (r.score) out << " score=" << format_double(*r.score);
    out << "]\n";
    if (r.validation.last_error) out << "failure: " << *r.validation.last_error << "\n";
    if (r.artifact) out << "```\n" << *r.artifact << (r.artifact->empty() || r.artifact->back() != '\n' ? "\n" : "") << "```\n";
  }
  out << "\n";
}

std::string render_context_block(const PromptContext& ctx, const CuratedContext& curated) {
  std::ostringstream out;
  out << "Problem:\n" << ctx.problem_brief << "\n\n";
  if (!ctx.hints.empty()) out << "Hints:\n" << ctx.hints << "\n\n";
  for (std::size_t i = 0; i < ctx.sketches.size(); ++i) {
    out << "Sketch " << static_cast<char>('A' + i) << ":\n```\n" << ctx.sketches[i]
        << (ctx.sketches[i].empty() || ctx.sketches[i].back() != '\n' ? "\n" : "") << "```\n\n";
  }
  if (curated.top.empty() && curated.bottom.empty() && curated.recent.empty()) {
    out << "No designs have been recorded yet.\n";
  } else {
    render_records(out, "Top designs (best scores):", curated.top);
    render_records(out, "Weakest designs:", curated.bottom);
    render_records(out, "Most recent designs:", curated.recent);
  }
  return out.str();
}

}  // namespace

std::vector<ChatMessage> build_strategist_prompt(const PromptContext& ctx,
                                                 const CuratedContext& curated) {
  std::ostringstream system;
  system << "You are the Strategist of a design-optimization loop. Study the problem, "
            "the sketches, the hints, and the recorded designs, then choose the next "
            "sampling strategy and write instructions for the Implementor.\n"
         << kSelectionGuidelines;
  if (ctx.iteration <= ctx.innovate_priority_until) system << kInnovatePriority;
  system << kReplyFormat;

  std::ostringstream user;
  user << "Iteration " << ctx.iteration << ".\n\n" << render_context_block(ctx, curated)
       << "\nDecide the strategy and write the instructions.";
  return {{"system", system.str()}, {"user", user.str()}};
}

std::vector<ChatMessage> build_implementor_prompt(const PromptContext& ctx,
                                                  const StrategistDecision& decision,
                                                  const CuratedContext& curated) {
  std::ostringstream system;
  system << "You are the Implementor of a design-optimization loop. Produce one complete, "
            "self-contained C++ program inside a single ``` fenced code block.\n"
            "Contract: the program is invoked as `prog <input-file> <output-file>`; both "
            "files are plain text, one row per line, comma-separated decimal values. "
            "Print a line containing exactly MEASURE_BEGIN on standard output immediately "
            "before the measured computation and a line containing exactly MEASURE_END "
            "immediately after it.\n";

  std::ostringstream user;
  user << "Iteration " << ctx.iteration << ".\n\n" << render_context_block(ctx, curated)
       << "\nStrategy: " << to_string(decision.strategy) << "\nInstructions:\n"
       << decision.instructions << "\n\nWrite the program now.";
  return {{"system", system.str()}, {"user", user.str()}};
}

namespace {

constexpr const char* kCompileFeedback = "The previous candidate failed the compile check.";
constexpr const char* kRunFeedback = "The previous candidate failed at runtime.";
constexpr const char* kCorrectnessFeedback = "The previous candidate produced incorrect output.";

}  // namespace

ChatMessage build_feedback_message(const std::string& stage, const std::string& diagnostics) {
  std::string head;
  if (stage == "compile") {
    head = kCompileFeedback;
  } else if (stage == "run") {
    head = kRunFeedback;
  } else {
    head = kCorrectnessFeedback;
  }
  return {"user", head + "\nDiagnostics:\n" + diagnostics +
                      "\nFix the problem and reply with the corrected full program in one "
                      "fenced code block."};
}

std::string feedback_stage(const std::string& message_content) {
  if (message_content.rfind(kCompileFeedback, 0) == 0) return "compile";
  if (message_content.rfind(kRunFeedback, 0) == 0) return "run";
  if (message_content.rfind(kCorrectnessFeedback, 0) == 0) return "correctness";
  return "";
}

}  // namespace optforge
