#pragma once

#include <chrono>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/llm_gateway.hpp"

namespace commerce {

// One scripted reply. A rule matches when its template id equals the request's
// (an empty template id matches any) and, if `contains` is set, the last user
// message contains it (ASCII case-insensitive).
struct StubRule {
  std::string template_id;
  std::optional<std::string> contains;
  std::string response;
  std::chrono::milliseconds delay{0};
  // Simulated failure instead of a reply: "transport" or "timeout".
  std::optional<std::string> fail;
};

struct StubScript {
  std::vector<StubRule> rules;
  std::string default_response;
  std::chrono::milliseconds default_delay{0};

  // First matching rule, or nullptr when the default applies.
  const StubRule* match(const ChatRequest& request) const;

  // {"default_response": ..., "default_delay_ms": n, "rules": [{"template", "contains",
  //  "response" | "response_json", "delay_ms", "fail"}]}
  static StubScript from_json(const nlohmann::json& doc);
  static StubScript load_file(const std::string& path);
};

// Appends `rule`, keeping earlier rules first.
StubScript register_stub_fixture(StubScript script, StubRule rule);

// Deterministic test double: the reply is a pure function of (script, request).
// Records the template id of every request it receives.
class StubBackend final : public ChatBackend {
 public:
  explicit StubBackend(StubScript script, std::string tag = "stub");

  RawCompletion send(const ChatRequest& request) override;
  std::string tag() const override { return tag_; }

  const StubScript& script() const noexcept { return script_; }
  std::vector<std::string> calls() const;
  std::size_t call_count(const std::string& template_id) const;
  void clear_calls();

 private:
  const StubScript script_;
  const std::string tag_;
  mutable std::mutex mu_;
  std::vector<std::string> calls_;
};

}  // namespace commerce
