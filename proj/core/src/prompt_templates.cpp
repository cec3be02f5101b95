#include "commerce/prompt_templates.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"
#include "embedded_resources.hpp"

namespace commerce {
namespace {

constexpr std::string_view kTemplateSuffix = ".txt";
constexpr std::string_view kSchemaSuffix = ".schema.json";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

PromptTemplate TemplateStore::parse(const std::string& id, const std::string& body,
                                    const std::optional<std::string>& schema_body) {
  PromptTemplate tmpl;
  tmpl.id = id;
  std::istringstream in(body);
  std::string line;
  std::string* section = nullptr;
  while (std::getline(in, line)) {
    if (line == "[system]") {
      section = &tmpl.system;
      continue;
    }
    if (line == "[user]") {
      section = &tmpl.user;
      continue;
    }
    if (!section) continue;  // header comments
    *section += line;
    *section += '\n';
  }
  tmpl.system = strip_trailing_newlines(tmpl.system);
  tmpl.user = strip_trailing_newlines(tmpl.user);
  if (tmpl.user.empty()) {
    throw Error(ErrorCode::kParse, "template '" + id + "' has no [user] section");
  }
  std::uint64_t hash = text::fnv1a64(body);
  if (schema_body) {
    auto schema = nlohmann::json::parse(*schema_body, nullptr, /*allow_exceptions=*/false);
    if (schema.is_discarded()) {
      throw Error(ErrorCode::kParse, "schema for template '" + id + "' is not valid JSON");
    }
    tmpl.schema = std::move(schema);
    hash ^= text::fnv1a64(*schema_body);
  }
  tmpl.version = text::hex64(hash).substr(0, 12);
  return tmpl;
}

TemplateStore TemplateStore::builtin() {
  std::map<std::string, std::string> bodies;
  std::map<std::string, std::string> schemas;
  for (const auto& resource : detail::embedded_resources()) {
    std::string_view path = resource.path;
    if (path.substr(0, 10) != "templates/") continue;
    std::string_view name = path.substr(10);
    if (ends_with(name, kSchemaSuffix)) {
      schemas[std::string(name.substr(0, name.size() - kSchemaSuffix.size()))] = resource.body;
    } else if (ends_with(name, kTemplateSuffix)) {
      bodies[std::string(name.substr(0, name.size() - kTemplateSuffix.size()))] = resource.body;
    }
  }
  TemplateStore store;
  for (const auto& [id, body] : bodies) {
    std::optional<std::string> schema;
    if (auto it = schemas.find(id); it != schemas.end()) schema = it->second;
    store.add(parse(id, body, schema));
  }
  return store;
}

void TemplateStore::load_directory(const std::string& directory) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(directory)) {
    throw Error(ErrorCode::kIo, "template directory not found: " + directory);
  }
  for (const auto& entry : fs::directory_iterator(directory)) {
    const std::string name = entry.path().filename().string();
    if (!entry.is_regular_file() || ends_with(name, kSchemaSuffix) ||
        !ends_with(name, kTemplateSuffix)) {
      continue;
    }
    std::string id = name.substr(0, name.size() - kTemplateSuffix.size());
    std::optional<std::string> schema;
    fs::path schema_path = entry.path().parent_path() / (id + std::string(kSchemaSuffix));
    if (fs::exists(schema_path)) schema = read_file(schema_path);
    add(parse(id, read_file(entry.path()), schema));
  }
}

void TemplateStore::add(PromptTemplate tmpl) {
  auto id = tmpl.id;
  templates_.insert_or_assign(std::move(id), std::move(tmpl));
}

const PromptTemplate& TemplateStore::get(const std::string& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::kNotFound, "unknown prompt template '" + id + "'");
  return it->second;
}

std::vector<std::string> TemplateStore::ids() const {
  std::vector<std::string> out;
  for (const auto& [id, tmpl] : templates_) out.push_back(id);
  return out;
}

std::string TemplateStore::substitute(const std::string& text,
                                      const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      auto close = text.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = vars.find(text.substr(i + 1, close - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += text[i++];
  }
  return out;
}

const std::string& LlmContext::model_for(const std::string& template_id) const {
  auto it = model_by_template.find(template_id);
  return it == model_by_template.end() ? default_model : it->second;
}

RenderedCall render_call(const LlmContext& llm, const std::string& template_id,
                         const std::map<std::string, std::string>& vars,
                         const std::vector<ChatMessage>& history) {
  const PromptTemplate& tmpl = llm.templates.get(template_id);
  RenderedCall call;
  call.user_prompt = TemplateStore::substitute(tmpl.user, vars);
  call.request.model_tag = llm.model_for(template_id);
  call.request.template_id = template_id;
  if (!tmpl.system.empty()) {
    call.request.messages.push_back({Role::kSystem, TemplateStore::substitute(tmpl.system, vars)});
  }
  for (const auto& message : history) call.request.messages.push_back(message);
  call.request.messages.push_back({Role::kUser, call.user_prompt});
  call.request.response_schema = tmpl.schema;
  return call;
}

}  // namespace commerce
