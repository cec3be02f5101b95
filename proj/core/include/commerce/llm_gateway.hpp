#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace commerce {

enum class Role { kSystem, kUser, kAssistant };

std::string_view role_name(Role role);
// Throws Error(kInvalidArgument) for anything outside system/user/assistant.
Role parse_role(std::string_view name);

struct ChatMessage {
  Role role = Role::kUser;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model_tag;
  // Prompt template that produced the request ("stage1.hyde", ...). Not sent over the
  // wire; the stub backend routes on it.
  std::string template_id;
  std::vector<ChatMessage> messages;
  std::optional<nlohmann::json> response_schema;
  double temperature = 0.0;
  int max_tokens = 1024;
  std::chrono::milliseconds timeout{30000};

  // Throws Error(kInvalidArgument) when the request breaks its invariants.
  void validate() const;
  // Content of the last user message, or empty.
  std::string_view last_user_message() const;
};

struct TokenUsage {
  int prompt_tokens = 0;
  int completion_tokens = 0;
};

// What a backend returns for a single exchange.
struct RawCompletion {
  std::string text;
  TokenUsage usage;
};

struct ChatResponse {
  std::string raw_text;
  std::optional<nlohmann::json> parsed;  // present iff a schema was given and output validated
  TokenUsage usage;
  std::chrono::nanoseconds latency{0};
  std::string backend_tag;
  int repair_rounds = 0;
  bool used_fallback_extraction = false;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Throws TransportError on network failure or timeout.
  virtual RawCompletion send(const ChatRequest& request) = 0;
  virtual std::string tag() const = 0;
};

// Sends the request; on schema-bearing requests parses and validates the reply. A
// reply that fails strict validation triggers exactly one repair exchange (the
// original conversation, the faulty reply, and the violations as a new user
// message). If the repaired reply also fails, the first balanced JSON value is
// extracted from the repaired reply, then from the original. Throws ValidationError
// (carrying the raw text) when everything fails; TransportError propagates.
ChatResponse complete_chat(ChatBackend& backend, const ChatRequest& request);

// Text of the user message sent in the repair round.
std::string repair_message(const std::vector<std::string>& violations);

struct GatewayConfig {
  std::string backend_url;
  std::string api_key;
  std::string model_tag = "default";
  std::chrono::milliseconds timeout{30000};

  // BACKEND_URL, API_KEY, MODEL_TAG, TIMEOUT_MS override the fields that are set.
  void apply_env();
};

}  // namespace commerce
