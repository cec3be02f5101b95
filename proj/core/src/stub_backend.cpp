#include "commerce/stub_backend.hpp"

#include <algorithm>
#include <fstream>
#include <thread>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

int rough_token_count(std::string_view text) {
  int count = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = c == ' ' || c == '\n' || c == '\t' || c == '\r';
    if (!space && !in_word) ++count;
    in_word = !space;
  }
  return count;
}

}  // namespace

const StubRule* StubScript::match(const ChatRequest& request) const {
  const std::string haystack = text::ascii_lower(request.last_user_message());
  for (const auto& rule : rules) {
    if (!rule.template_id.empty() && rule.template_id != request.template_id) continue;
    if (rule.contains && haystack.find(text::ascii_lower(*rule.contains)) == std::string::npos) {
      continue;
    }
    return &rule;
  }
  return nullptr;
}

StubScript StubScript::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "stub script must be a JSON object");
  StubScript script;
  script.default_response = doc.value("default_response", std::string{});
  script.default_delay = std::chrono::milliseconds(doc.value("default_delay_ms", 0));
  for (const auto& item : doc.value("rules", nlohmann::json::array())) {
    StubRule rule;
    rule.template_id = item.value("template", std::string{});
    if (item.contains("contains")) rule.contains = item.at("contains").get<std::string>();
    if (item.contains("response_json")) {
      rule.response = item.at("response_json").dump();
    } else {
      rule.response = item.value("response", std::string{});
    }
    rule.delay = std::chrono::milliseconds(item.value("delay_ms", 0));
    if (item.contains("fail")) rule.fail = item.at("fail").get<std::string>();
    script.rules.push_back(std::move(rule));
  }
  return script;
}

StubScript StubScript::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open stub script: " + path);
  auto doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) throw Error(ErrorCode::kParse, "stub script is not valid JSON: " + path);
  return from_json(doc);
}

StubScript register_stub_fixture(StubScript script, StubRule rule) {
  script.rules.push_back(std::move(rule));
  return script;
}

StubBackend::StubBackend(StubScript script, std::string tag)
    : script_(std::move(script)), tag_(std::move(tag)) {}

RawCompletion StubBackend::send(const ChatRequest& request) {
  {
    std::lock_guard lock(mu_);
    calls_.push_back(request.template_id);
  }
  const StubRule* rule = script_.match(request);
  auto delay = rule ? rule->delay : script_.default_delay;
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  if (rule && rule->fail) {
    if (*rule->fail == "timeout") {
      throw TransportError("stub: request timed out", /*retriable=*/true);
    }
    throw TransportError("stub: simulated transport failure", /*retriable=*/true);
  }
  RawCompletion out;
  out.text = rule ? rule->response : script_.default_response;
  for (const auto& m : request.messages) out.usage.prompt_tokens += rough_token_count(m.content);
  out.usage.completion_tokens = rough_token_count(out.text);
  return out;
}

std::vector<std::string> StubBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t StubBackend::call_count(const std::string& template_id) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count(calls_.begin(), calls_.end(), template_id));
}

void StubBackend::clear_calls() {
  std::lock_guard lock(mu_);
  calls_.clear();
}

}  // namespace commerce
