#include "optforge/chat.hpp"

#include <cmath>
#include <stdexcept>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "optforge/dataio.hpp"

namespace optforge {

using nlohmann::json;

void validate_endpoint(const AgentEndpoint& endpoint) {
  if (endpoint.base_url.empty()) throw std::invalid_argument("endpoint base_url is empty");
  if (endpoint.temperature < 0.0 || endpoint.temperature > 2.0) {
    throw std::invalid_argument("temperature must lie in [0, 2]");
  }
  if (endpoint.timeout_seconds <= 0.0) throw std::invalid_argument("timeout must be positive");
  if (endpoint.max_context <= 0) throw std::invalid_argument("max_context must be positive");
}

std::int64_t estimate_tokens(const std::string& text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

std::int64_t estimate_tokens(const std::vector<ChatMessage>& messages) {
  std::int64_t total = 0;
  for (const auto& m : messages) total += estimate_tokens(m.content) + estimate_tokens(m.role);
  return total;
}

namespace {

struct ParsedUrl {
  std::string scheme;
  std::string host_port;  // "host[:port]"
  std::string prefix;     // path prefix without trailing slash
};

ParsedUrl parse_base_url(const std::string& base_url) {
  ParsedUrl out;
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("base_url needs a scheme: " + base_url);
  }
  out.scheme = base_url.substr(0, scheme_end);
  std::string rest = base_url.substr(scheme_end + 3);
  auto slash = rest.find('/');
  out.host_port = slash == std::string::npos ? rest : rest.substr(0, slash);
  if (slash != std::string::npos) out.prefix = rest.substr(slash);
  while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  if (out.host_port.empty()) {
    throw std::invalid_argument("base_url has no host: " + base_url);
  }
  return out;
}

}  // namespace

HttpChatBackend::HttpChatBackend(AgentEndpoint endpoint, std::optional<std::string> api_key)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)) {
  validate_endpoint(endpoint_);
}

ChatOutcome HttpChatBackend::complete(const std::vector<ChatMessage>& messages) {
  ChatOutcome outcome;
  ParsedUrl url;
  try {
    url = parse_base_url(endpoint_.base_url);
  } catch (const std::exception& e) {
    outcome.error = ChatError{e.what(), true};
    return outcome;
  }

  json body;
  body["model"] = endpoint_.model;
  body["temperature"] = endpoint_.temperature;
  body["stream"] = false;
  json msgs = json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = msgs;

  httplib::Client client((url.scheme + "://" + url.host_port).c_str());
  auto seconds = static_cast<time_t>(endpoint_.timeout_seconds);
  auto micros = static_cast<time_t>((endpoint_.timeout_seconds - static_cast<double>(seconds)) * 1e6);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Headers headers;
  if (api_key_ && !api_key_->empty()) {
    headers.emplace("Authorization", "Bearer " + *api_key_);
  }

  auto res = client.Post((url.prefix + "/v1/chat/completions").c_str(), headers,
                         body.dump(), "application/json");
  if (!res) {
    outcome.error = ChatError{"transport failure: " + httplib::to_string(res.error()), true};
    return outcome;
  }
  if (res->status < 200 || res->status >= 300) {
    outcome.error = ChatError{"endpoint returned status " + std::to_string(res->status) +
                                  ": " + res->body.substr(0, 512),
                              false};
    return outcome;
  }

  json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) {
    outcome.error = ChatError{"endpoint returned unparsable body", false};
    return outcome;
  }
  try {
    ChatReply parsed;
    parsed.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    if (reply.contains("usage") && reply["usage"].is_object() &&
        reply["usage"].contains("prompt_tokens") &&
        reply["usage"].contains("completion_tokens")) {
      parsed.prompt_tokens = reply["usage"]["prompt_tokens"].get<std::int64_t>();
      parsed.completion_tokens = reply["usage"]["completion_tokens"].get<std::int64_t>();
    } else {
      parsed.prompt_tokens = estimate_tokens(messages);
      parsed.completion_tokens = estimate_tokens(parsed.content);
      parsed.usage_estimated = true;
    }
    outcome.reply = std::move(parsed);
  } catch (const std::exception& e) {
    outcome.error = ChatError{std::string("malformed completion payload: ") + e.what(), false};
  }
  return outcome;
}

ScriptedChatBackend::ScriptedChatBackend(const std::filesystem::path& script_file,
                                         std::string lane, std::size_t start_ordinal)
    : lane_(std::move(lane)), ordinal_(start_ordinal) {
  json script = json::parse(read_text_file(script_file));
  if (!script.contains(lane_)) {
    throw std::invalid_argument("script " + script_file.string() + " has no '" + lane_ +
                                "' replies");
  }
  replies_ = script.at(lane_).get<std::vector<std::string>>();
  if (script.contains("cycle")) cycle_ = script.at("cycle").get<bool>();
}

ChatOutcome ScriptedChatBackend::complete(const std::vector<ChatMessage>& messages) {
  ChatOutcome outcome;
  if (replies_.empty() || (!cycle_ && ordinal_ >= replies_.size())) {
    ++ordinal_;
    outcome.error = ChatError{"script exhausted for lane " + lane_, true};
    return outcome;
  }
  const std::string& text = replies_[ordinal_ % replies_.size()];
  ++ordinal_;
  ChatReply reply;
  reply.content = text;
  reply.prompt_tokens = estimate_tokens(messages);
  reply.completion_tokens = estimate_tokens(text);
  reply.usage_estimated = true;
  outcome.reply = std::move(reply);
  return outcome;
}

std::unique_ptr<ChatBackend> make_chat_backend(const AgentEndpoint& endpoint,
                                               const std::string& lane,
                                               std::size_t start_ordinal,
                                               std::optional<std::string> api_key) {
  const std::string scheme = "script://";
  if (endpoint.base_url.rfind(scheme, 0) == 0) {
    return std::make_unique<ScriptedChatBackend>(endpoint.base_url.substr(scheme.size()),
                                                 lane, start_ordinal);
  }
  return std::make_unique<HttpChatBackend>(endpoint, std::move(api_key));
}

}  // namespace optforge
