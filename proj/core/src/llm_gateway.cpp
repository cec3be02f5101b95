#include "commerce/llm_gateway.hpp"

#include <cstdlib>

#include "commerce/errors.hpp"
#include "commerce/json_schema.hpp"

namespace commerce {
namespace {

std::optional<nlohmann::json> strict_valid(const std::string& raw, const nlohmann::json& schema,
                                           std::vector<std::string>& violations) {
  auto parsed = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (parsed.is_discarded()) {
    violations = {"/: output is not valid JSON"};
    return std::nullopt;
  }
  violations = validate_json(parsed, schema);
  if (!violations.empty()) return std::nullopt;
  return parsed;
}

std::optional<nlohmann::json> extracted_valid(const std::string& raw, const nlohmann::json& schema) {
  auto candidate = extract_first_json(raw);
  if (!candidate || !validate_json(*candidate, schema).empty()) return std::nullopt;
  return candidate;
}

}  // namespace

std::string_view role_name(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kInvalidArgument, "unknown chat role '" + std::string(name) + "'");
}

void ChatRequest::validate() const {
  if (messages.empty()) throw Error(ErrorCode::kInvalidArgument, "chat request has no messages");
  if (temperature < 0) throw Error(ErrorCode::kInvalidArgument, "temperature must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorCode::kInvalidArgument, "max_tokens must be positive");
}

std::string_view ChatRequest::last_user_message() const {
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == Role::kUser) return it->content;
  }
  return {};
}

std::string repair_message(const std::vector<std::string>& violations) {
  std::string out =
      "Your previous reply did not validate against the required JSON schema. Violations:\n";
  for (const auto& v : violations) out += "- " + v + "\n";
  out += "Reply again with only the corrected JSON value.";
  return out;
}

ChatResponse complete_chat(ChatBackend& backend, const ChatRequest& request) {
  request.validate();
  const auto started = std::chrono::steady_clock::now();

  ChatResponse response;
  response.backend_tag = backend.tag();
  RawCompletion first = backend.send(request);
  response.raw_text = first.text;
  response.usage = first.usage;

  auto finish = [&]() {
    response.latency = std::chrono::steady_clock::now() - started;
    return response;
  };

  if (!request.response_schema) return finish();
  const nlohmann::json& schema = *request.response_schema;

  std::vector<std::string> violations;
  if (auto parsed = strict_valid(first.text, schema, violations)) {
    response.parsed = std::move(parsed);
    return finish();
  }

  ChatRequest repair = request;
  repair.messages.push_back({Role::kAssistant, first.text});
  repair.messages.push_back({Role::kUser, repair_message(violations)});
  RawCompletion second = backend.send(repair);
  response.repair_rounds = 1;
  response.raw_text = second.text;
  response.usage.prompt_tokens += second.usage.prompt_tokens;
  response.usage.completion_tokens += second.usage.completion_tokens;

  std::vector<std::string> repaired_violations;
  if (auto parsed = strict_valid(second.text, schema, repaired_violations)) {
    response.parsed = std::move(parsed);
    return finish();
  }
  if (auto parsed = extracted_valid(second.text, schema)) {
    response.parsed = std::move(parsed);
    response.used_fallback_extraction = true;
    return finish();
  }
  if (auto parsed = extracted_valid(first.text, schema)) {
    response.parsed = std::move(parsed);
    response.raw_text = first.text;
    response.used_fallback_extraction = true;
    return finish();
  }
  throw ValidationError("model output failed schema validation after repair and extraction",
                        std::move(repaired_violations), second.text);
}

void GatewayConfig::apply_env() {
  if (const char* v = std::getenv("BACKEND_URL"); v && *v) backend_url = v;
  if (const char* v = std::getenv("API_KEY"); v && *v) api_key = v;
  if (const char* v = std::getenv("MODEL_TAG"); v && *v) model_tag = v;
  if (const char* v = std::getenv("TIMEOUT_MS"); v && *v) {
    char* end = nullptr;
    long ms = std::strtol(v, &end, 10);
    if (end && *end == '\0' && ms > 0) timeout = std::chrono::milliseconds(ms);
  }
}

}  // namespace commerce
