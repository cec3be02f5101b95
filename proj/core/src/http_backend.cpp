#include "commerce/http_backend.hpp"

#include <httplib.h>

#include "commerce/errors.hpp"

namespace commerce {

OpenAiHttpBackend::OpenAiHttpBackend(GatewayConfig config) : config_(std::move(config)) {
  const std::string& url = config_.backend_url;
  auto scheme_end = url.find("://");
  if (url.empty() || scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "BACKEND_URL must look like http://host[:port][/v1]");
  }
  auto path_start = url.find('/', scheme_end + 3);
  origin_ = url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  if (prefix.empty()) prefix = "/v1";
  endpoint_ = prefix + "/chat/completions";
}

std::string OpenAiHttpBackend::tag() const { return "openai-http:" + config_.model_tag; }

nlohmann::json OpenAiHttpBackend::wire_request(const ChatRequest& request, const std::string& model) {
  nlohmann::json body;
  body["model"] = model;
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_tokens;
  body["stream"] = false;
  body["messages"] = nlohmann::json::array();
  for (const auto& m : request.messages) {
    body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  if (request.response_schema) {
    body["response_format"] = {
        {"type", "json_schema"},
        {"json_schema", {{"name", "response"}, {"schema", *request.response_schema}}}};
  }
  return body;
}

RawCompletion OpenAiHttpBackend::send(const ChatRequest& request) {
  httplib::Client client(origin_);
  auto timeout = std::min(request.timeout, config_.timeout);
  auto seconds = static_cast<time_t>(timeout.count() / 1000);
  auto micros = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);
  if (!config_.api_key.empty()) client.set_bearer_token_auth(config_.api_key);

  const std::string model = request.model_tag.empty() ? config_.model_tag : request.model_tag;
  auto result = client.Post(endpoint_, wire_request(request, model).dump(), "application/json");
  if (!result) {
    throw TransportError("chat completion request failed: " + httplib::to_string(result.error()),
                         /*retriable=*/true);
  }
  if (result->status < 200 || result->status >= 300) {
    bool retriable = result->status == 429 || result->status >= 500;
    throw TransportError("chat completion returned HTTP " + std::to_string(result->status),
                         retriable);
  }
  auto body = nlohmann::json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (body.is_discarded() || !body.contains("choices") || !body["choices"].is_array() ||
      body["choices"].empty()) {
    throw TransportError("chat completion response has no choices", /*retriable=*/false);
  }
  const auto& message = body["choices"][0].value("message", nlohmann::json::object());
  RawCompletion out;
  if (message.contains("content") && message["content"].is_string()) {
    out.text = message["content"].get<std::string>();
  }
  if (auto usage = body.find("usage"); usage != body.end() && usage->is_object()) {
    out.usage.prompt_tokens = usage->value("prompt_tokens", 0);
    out.usage.completion_tokens = usage->value("completion_tokens", 0);
  }
  return out;
}

}  // namespace commerce
