#pragma once

#include <string>

#include "commerce/llm_gateway.hpp"

namespace commerce {

// OpenAI-compatible chat-completions over HTTP(S) with bearer auth. BACKEND_URL may
// carry a path prefix ("http://host:8000/v1"); requests go to <prefix>/chat/completions,
// defaulting the prefix to /v1. Schema-bearing requests also send
// response_format {type: json_schema} so servers with guided decoding can honor it.
class OpenAiHttpBackend final : public ChatBackend {
 public:
  explicit OpenAiHttpBackend(GatewayConfig config);

  RawCompletion send(const ChatRequest& request) override;
  std::string tag() const override;

  // The JSON body sent for `request`.
  static nlohmann::json wire_request(const ChatRequest& request, const std::string& model);

 private:
  GatewayConfig config_;
  std::string origin_;     // scheme://host[:port]
  std::string endpoint_;   // path of the chat-completions route
};

}  // namespace commerce
