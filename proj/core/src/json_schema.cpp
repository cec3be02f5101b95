#include "commerce/json_schema.hpp"

#include <algorithm>
#include <cmath>

#include "commerce/errors.hpp"

namespace commerce {
namespace {

std::string type_name(const nlohmann::json& value) {
  if (value.is_number_integer()) return "integer";
  if (value.is_number()) return "number";
  return value.type_name();
}

bool matches_type(const nlohmann::json& value, const std::string& type) {
  if (type == "object") return value.is_object();
  if (type == "array") return value.is_array();
  if (type == "string") return value.is_string();
  if (type == "boolean") return value.is_boolean();
  if (type == "null") return value.is_null();
  if (type == "number") return value.is_number();
  if (type == "integer") {
    if (value.is_number_integer()) return true;
    // 3.0 is an integer in JSON Schema terms.
    if (!value.is_number_float()) return false;
    double d = value.get<double>();
    return std::isfinite(d) && std::floor(d) == d;
  }
  return false;
}

std::string pointer_child(const std::string& base, const std::string& token) {
  std::string escaped;
  for (char c : token) {
    if (c == '~') {
      escaped += "~0";
    } else if (c == '/') {
      escaped += "~1";
    } else {
      escaped += c;
    }
  }
  return base + "/" + escaped;
}

void validate_at(const nlohmann::json& value, const nlohmann::json& schema, const std::string& path,
                 std::vector<std::string>& out) {
  if (!schema.is_object()) return;
  const std::string where = path.empty() ? "/" : path;

  if (auto it = schema.find("type"); it != schema.end()) {
    std::vector<std::string> types;
    if (it->is_string()) {
      types.push_back(it->get<std::string>());
    } else if (it->is_array()) {
      for (const auto& t : *it) types.push_back(t.get<std::string>());
    }
    bool ok = std::any_of(types.begin(), types.end(),
                          [&](const std::string& t) { return matches_type(value, t); });
    if (!types.empty() && !ok) {
      std::string expected;
      for (const auto& t : types) expected += (expected.empty() ? "" : "|") + t;
      out.push_back(where + ": expected " + expected + ", got " + type_name(value));
      return;
    }
  }

  if (auto it = schema.find("enum"); it != schema.end() && it->is_array()) {
    if (std::find(it->begin(), it->end(), value) == it->end()) {
      out.push_back(where + ": value " + value.dump() + " not in enum " + it->dump());
    }
  }
  if (auto it = schema.find("const"); it != schema.end() && *it != value) {
    out.push_back(where + ": value must equal " + it->dump());
  }

  if (value.is_number()) {
    double number = value.get<double>();
    if (auto it = schema.find("minimum"); it != schema.end() && number < it->get<double>()) {
      out.push_back(where + ": " + value.dump() + " is below minimum " + it->dump());
    }
    if (auto it = schema.find("maximum"); it != schema.end() && number > it->get<double>()) {
      out.push_back(where + ": " + value.dump() + " is above maximum " + it->dump());
    }
  }

  if (value.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() &&
                                            value.get_ref<const std::string&>().size() <
                                                it->get<std::size_t>()) {
      out.push_back(where + ": string shorter than " + it->dump());
    }
  }

  if (value.is_object()) {
    const auto properties = schema.value("properties", nlohmann::json::object());
    if (auto it = schema.find("required"); it != schema.end() && it->is_array()) {
      for (const auto& name : *it) {
        const auto key = name.get<std::string>();
        if (!value.contains(key)) out.push_back(pointer_child(path, key) + ": required field missing");
      }
    }
    const bool closed = schema.value("additionalProperties", true) == false;
    for (const auto& [key, child] : value.items()) {
      if (auto prop = properties.find(key); prop != properties.end()) {
        validate_at(child, *prop, pointer_child(path, key), out);
      } else if (closed) {
        out.push_back(pointer_child(path, key) + ": unexpected field");
      }
    }
  }

  if (value.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && value.size() < it->get<std::size_t>()) {
      out.push_back(where + ": fewer than " + it->dump() + " items");
    }
    if (auto it = schema.find("maxItems"); it != schema.end() && value.size() > it->get<std::size_t>()) {
      out.push_back(where + ": more than " + it->dump() + " items");
    }
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < value.size(); ++i) {
        validate_at(value[i], *it, pointer_child(path, std::to_string(i)), out);
      }
    }
  }
}

// End offset (exclusive) of the balanced value starting at `start`, or npos.
std::size_t balanced_end(std::string_view raw, std::size_t start) {
  std::vector<char> stack;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < raw.size(); ++i) {
    char c = raw[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    switch (c) {
      case '"': in_string = true; break;
      case '{': stack.push_back('}'); break;
      case '[': stack.push_back(']'); break;
      case '}':
      case ']':
        if (stack.empty() || stack.back() != c) return std::string_view::npos;
        stack.pop_back();
        if (stack.empty()) return i + 1;
        break;
      default: break;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::vector<std::string> validate_json(const nlohmann::json& value, const nlohmann::json& schema) {
  std::vector<std::string> violations;
  validate_at(value, schema, "", violations);
  return violations;
}

std::optional<nlohmann::json> extract_first_json(std::string_view raw) {
  for (std::size_t start = raw.find_first_of("{["); start != std::string_view::npos;
       start = raw.find_first_of("{[", start + 1)) {
    std::size_t end = balanced_end(raw, start);
    if (end == std::string_view::npos) continue;
    auto candidate = nlohmann::json::parse(raw.substr(start, end - start), nullptr, false);
    if (!candidate.is_discarded()) return candidate;
  }
  return std::nullopt;
}

RepairOutcome validate_and_repair_json(std::string_view raw, const nlohmann::json& schema) {
  auto strict = nlohmann::json::parse(raw, nullptr, /*allow_exceptions=*/false);
  if (!strict.is_discarded()) {
    auto violations = validate_json(strict, schema);
    if (violations.empty()) return {std::move(strict), false};
    throw ValidationError("structured output does not match schema", std::move(violations),
                          std::string(raw));
  }
  auto extracted = extract_first_json(raw);
  if (!extracted) {
    throw ValidationError("no JSON value found in model output", {"/: no JSON value found"},
                          std::string(raw));
  }
  auto violations = validate_json(*extracted, schema);
  if (!violations.empty()) {
    throw ValidationError("extracted JSON does not match schema", std::move(violations),
                          std::string(raw));
  }
  return {std::move(*extracted), true};
}

}  // namespace commerce
