#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace commerce {

// Validates `value` against a JSON-Schema subset: type (incl. type arrays), enum,
// const, properties, required, additionalProperties (bool), items, minItems,
// maxItems, minLength, minimum, maximum. Returns one message per violation, each
// prefixed by the JSON pointer of the offending value ("/score: ...").
std::vector<std::string> validate_json(const nlohmann::json& value, const nlohmann::json& schema);

// First balanced top-level JSON object or array embedded in free text that parses.
// Brackets inside string literals are ignored.
std::optional<nlohmann::json> extract_first_json(std::string_view raw);

struct RepairOutcome {
  nlohmann::json value;
  bool extracted = false;  // true when strict parsing failed and extraction was used
};

// Strict parse then validate; if the text is not JSON, extract the first balanced
// value and validate that. Never mutates field values. Throws ValidationError listing
// the violations (or "no JSON value found") with `raw` attached.
RepairOutcome validate_and_repair_json(std::string_view raw, const nlohmann::json& schema);

}  // namespace commerce
