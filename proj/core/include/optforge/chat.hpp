#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "optforge/trace.hpp"  // ChatMessage

namespace optforge {

struct AgentEndpoint {
  std::string base_url;     // "http(s)://host[:port][/prefix]" or "script://<file>"
  std::string model;
  double temperature = 0.7;  // must lie in [0, 2]
  double timeout_seconds = 120.0;
  std::int64_t max_context = 128000;
};

void validate_endpoint(const AgentEndpoint& endpoint);  // throws on bad fields

struct ChatReply {
  std::string content;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool usage_estimated = false;  // counts derived from ceil(bytes/4)
};

struct ChatError {
  std::string message;
  bool transport = false;  // connection/timeout-level failure
};

struct ChatOutcome {
  std::optional<ChatReply> reply;
  std::optional<ChatError> error;
  bool ok() const { return reply.has_value(); }
};

/// One chat-completion backend. Implementations must be deterministic for the
/// scripted case and honest about transport failures for the HTTP case.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatOutcome complete(const std::vector<ChatMessage>& messages) = 0;
};

/// POSTs to {base_url}/v1/chat/completions with body fields
/// model/messages/temperature/stream=false and reads the assistant message
/// plus the optional usage report. `api_key`, when set, is sent as a bearer
/// token.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(AgentEndpoint endpoint, std::optional<std::string> api_key = {});
  ChatOutcome complete(const std::vector<ChatMessage>& messages) override;

 private:
  AgentEndpoint endpoint_;
  std::optional<std::string> api_key_;
};

/// Offline agent: replies come from a script file, keyed by request ordinal.
/// The file is JSON with one reply array per lane:
///   {"strategist": ["...", ...], "implementor": ["...", ...], "cycle": false}
/// With "cycle": true the arrays repeat; otherwise running past the end is a
/// transport error (the run records a code-less iteration).
class ScriptedChatBackend : public ChatBackend {
 public:
  ScriptedChatBackend(const std::filesystem::path& script_file, std::string lane,
                      std::size_t start_ordinal = 0);
  ChatOutcome complete(const std::vector<ChatMessage>& messages) override;

  std::size_t ordinal() const { return ordinal_; }

 private:
  std::vector<std::string> replies_;
  bool cycle_ = false;
  std::string lane_;
  std::size_t ordinal_ = 0;
};

/// Builds the backend an endpoint describes. `lane` selects the reply array in
/// scripted mode ("strategist" or "implementor"); `start_ordinal` positions a
/// scripted backend mid-script when a run is resumed.
std::unique_ptr<ChatBackend> make_chat_backend(const AgentEndpoint& endpoint,
                                               const std::string& lane,
                                               std::size_t start_ordinal = 0,
                                               std::optional<std::string> api_key = {});

/// ceil(bytes/4) fallback used when an endpoint reports no usage.
std::int64_t estimate_tokens(const std::vector<ChatMessage>& messages);
std::int64_t estimate_tokens(const std::string& text);

}  // namespace optforge
