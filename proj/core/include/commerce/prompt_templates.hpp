#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/llm_gateway.hpp"

namespace commerce {

struct PromptTemplate {
  std::string id;
  std::string system;
  std::string user;  // may hold {query}, {attributes}, {profile} ... placeholders
  std::optional<nlohmann::json> schema;
  std::string version;  // content hash, changes whenever the file does
};

// Template files are "<id>.txt" with a "[system]" and a "[user]" section ('#' lines
// before the first section are comments); the response schema, if any, sits next to
// it as "<id>.schema.json".
class TemplateStore {
 public:
  // Templates compiled into the library.
  static TemplateStore builtin();

  // Adds or replaces templates from the files in `directory`.
  void load_directory(const std::string& directory);
  void add(PromptTemplate tmpl);

  bool contains(const std::string& id) const { return templates_.contains(id); }
  // Throws Error(kNotFound).
  const PromptTemplate& get(const std::string& id) const;
  std::vector<std::string> ids() const;

  // Replaces {name} for every name in `vars`; other braces are left untouched.
  static std::string substitute(const std::string& text,
                                const std::map<std::string, std::string>& vars);

  static PromptTemplate parse(const std::string& id, const std::string& body,
                              const std::optional<std::string>& schema_body);

 private:
  std::map<std::string, PromptTemplate> templates_;
};

// Everything a stage needs to talk to a model: the backend, the template set, and
// the model tag to use per template id (falling back to `default_model`).
struct LlmContext {
  ChatBackend& backend;
  const TemplateStore& templates;
  std::string default_model = "default";
  std::map<std::string, std::string> model_by_template = {};

  const std::string& model_for(const std::string& template_id) const;
};

struct RenderedCall {
  ChatRequest request;
  std::string user_prompt;  // rendered user section
};

RenderedCall render_call(const LlmContext& llm, const std::string& template_id,
                         const std::map<std::string, std::string>& vars,
                         const std::vector<ChatMessage>& history = {});

}  // namespace commerce
