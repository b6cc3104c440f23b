#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "optforge/chat.hpp"
#include "optforge/trace.hpp"

namespace optforge {

struct StrategistDecision {
  Strategy strategy = Strategy::NotAvailable;
  std::string instructions;
  std::string raw_response;
};

/// Total parser for strategist replies: case-insensitive match on a
/// "STRATEGY:" line selects the strategy; anything else yields not-available.
/// Instructions are the INSTRUCTIONS: section when present, otherwise the
/// text after the strategy line, otherwise the whole reply.
StrategistDecision parse_strategist_reply(const std::string& reply);

/// Canonical reply text for a decision; parse_strategist_reply inverts it for
/// the three actual strategies.
std::string render_decision(const StrategistDecision& decision);

/// First complete ```-fenced code block of a reply, fence lines stripped.
/// An optional language tag after the opening fence is ignored. Returns
/// nullopt when no complete fenced block exists.
std::optional<std::string> extract_code_block(const std::string& reply);

struct PromptContext {
  std::string problem_brief;          // task statement shown to both agents
  std::vector<std::string> sketches;  // starting-point artifacts
  std::string hints;                  // design-space guidance, may be empty
  std::int64_t iteration = 1;         // 1-based
  std::int64_t innovate_priority_until = 10;
};

/// Deterministic strategist prompt: a system directive (strategy selection
/// guidelines, specific-instruction rule, and for iterations up to the
/// threshold the innovate-priority directive) plus one user message rendering
/// the curated designs with their scores, strategies, and validation
/// statuses.
std::vector<ChatMessage> build_strategist_prompt(const PromptContext& ctx,
                                                 const CuratedContext& curated);

/// Initial implementor prompt for one iteration: system directive, the task
/// brief, the strategist's instructions, and the code of the curated designs
/// the instructions may reference.
std::vector<ChatMessage> build_implementor_prompt(const PromptContext& ctx,
                                                  const StrategistDecision& decision,
                                                  const CuratedContext& curated);

/// Feedback turn appended to a failing implementor conversation. `stage` is
/// one of "compile", "run", "correctness"; `diagnostics` must already be
/// truncated to the configured cap.
ChatMessage build_feedback_message(const std::string& stage, const std::string& diagnostics);

/// Stage named by a feedback message, for trace post-processing; empty when
/// the text is not a feedback message.
std::string feedback_stage(const std::string& message_content);

}  // namespace optforge
