#include "commerce/query_pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>

#include "commerce/errors.hpp"
#include "commerce/llm_gateway.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

constexpr std::array<std::string_view, 7> kMaxNames = {
    "price_max", "max_price", "price max", "max price", "budget", "max_budget", "price_limit"};
constexpr std::array<std::string_view, 4> kMinNames = {"price_min", "min_price", "price min",
                                                       "min price"};
constexpr std::array<std::string_view, 3> kRangeNames = {"price", "price_range", "price range"};

constexpr std::array<std::string_view, 8> kUpperWords = {"under",   "below", "less than", "up to",
                                                         "at most", "max",   "<",         "cheaper than"};
constexpr std::array<std::string_view, 7> kLowerWords = {"over",     "above", "more than", "at least",
                                                         "min",      "from",  ">"};

template <std::size_t N>
bool one_of(std::string_view needle, const std::array<std::string_view, N>& names) {
  return std::find(names.begin(), names.end(), needle) != names.end();
}

template <std::size_t N>
std::optional<std::size_t> starts_with_any(std::string_view value,
                                           const std::array<std::string_view, N>& words) {
  for (auto word : words) {
    if (value.substr(0, word.size()) == word) return word.size();
  }
  return std::nullopt;
}

std::string string_field(const nlohmann::json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return {};
  if (it->is_string()) return text::trim(it->get<std::string>());
  if (it->is_number()) return text::format_number(it->get<double>());
  return {};
}

std::string value_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return text::format_number(value.get<double>());
  return {};
}

std::string default_trace_id(std::string_view query, const Stage1Context& context) {
  std::string seed(query);
  seed += '\x1f';
  if (context.profile) seed += context.profile->user_id;
  seed += '\x1f' + std::to_string(context.history.size());
  return "s1-" + text::hex64(text::fnv1a64(seed)).substr(0, 12);
}

std::string attributes_text(const std::vector<AttributePair>& attributes) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& a : attributes) out.push_back(to_json(a));
  return out.dump();
}

void append_unique(std::vector<AttributePair>& into, const std::vector<AttributePair>& pairs) {
  for (const auto& pair : pairs) {
    if (std::find(into.begin(), into.end(), pair) == into.end()) into.push_back(pair);
  }
}

ChatResponse call(const LlmContext& llm, const std::string& template_id,
                  const std::map<std::string, std::string>& vars, const Stage1Context& context,
                  const std::string& trace_id, std::string* rendered_prompt = nullptr) {
  try {
    auto rendered = render_call(llm, template_id, vars, context.history);
    if (rendered_prompt) *rendered_prompt = rendered.user_prompt;
    return complete_chat(llm.backend, rendered.request);
  } catch (Error& e) {
    e.set_trace_id(trace_id);
    throw;
  }
}

}  // namespace

bool HypotheticalProduct::valid() const {
  return !category.empty() && (!specific_item.empty() || !generic_item.empty());
}

std::string HypotheticalProduct::query_text() const {
  return category + " " + specific_item + " " + generic_item;
}

nlohmann::json to_json(const AttributePair& pair) {
  return {{"name", pair.name}, {"value", pair.value}};
}

nlohmann::json to_json(const StructuredQuery& query) {
  nlohmann::json attributes = nlohmann::json::array();
  for (const auto& a : query.attributes) attributes.push_back(to_json(a));
  return {{"category", query.category},
          {"attributes", attributes},
          {"values", query.values},
          {"hard_constraints", to_json(query.hard_constraints)}};
}

nlohmann::json to_json(const HypotheticalProduct& product) {
  return {{"category", product.category},
          {"specific_item", product.specific_item},
          {"generic_item", product.generic_item},
          {"relevance_note", product.relevance_note}};
}

nlohmann::json hypotheticals_to_json(const std::vector<HypotheticalProduct>& products) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : products) out.push_back(to_json(p));
  return out;
}

std::vector<HypotheticalProduct> hypotheticals_from_json(const nlohmann::json& json) {
  if (!json.is_array()) throw Error(ErrorCode::kParse, "hypothetical products must be an array");
  std::vector<HypotheticalProduct> out;
  for (const auto& item : json) {
    if (!item.is_object()) throw Error(ErrorCode::kParse, "hypothetical product must be an object");
    out.push_back({string_field(item, "category"), string_field(item, "specific_item"),
                   string_field(item, "generic_item"), string_field(item, "relevance_note")});
  }
  return out;
}

nlohmann::json to_json(const Stage1Output& output) {
  return {{"trace_id", output.trace_id},
          {"query", output.query},
          {"structured_query", to_json(output.structured_query)},
          {"hypotheticals", hypotheticals_to_json(output.hypotheticals)},
          {"timing", to_json(output.timing)},
          {"hyde_prompt", output.hyde_prompt},
          {"notes", output.notes}};
}

Stage1Output stage1_output_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw Error(ErrorCode::kParse, "stage-1 trace must be an object");
  Stage1Output out;
  try {
    out.trace_id = json.value("trace_id", std::string{});
    out.query = json.at("query").get<std::string>();
    const auto& sq = json.at("structured_query");
    out.structured_query.category = sq.value("category", std::string{});
    for (const auto& a : sq.value("attributes", nlohmann::json::array())) {
      out.structured_query.attributes.push_back(
          {a.at("name").get<std::string>(), a.at("value").get<std::string>()});
    }
    out.structured_query.values = sq.value("values", std::vector<std::string>{});
    out.structured_query.hard_constraints =
        filter_constraints_from_json(sq.value("hard_constraints", nlohmann::json::object()));
    out.hypotheticals = hypotheticals_from_json(json.at("hypotheticals"));
    out.hyde_prompt = json.value("hyde_prompt", std::string{});
    out.notes = json.value("notes", std::vector<std::string>{});
    out.timing.stage = Stage::kStage1Formulation;
    out.timing.trace_id = out.trace_id;
    if (json.contains("timing")) out.timing.seconds = json["timing"].value("seconds", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("stage-1 trace: ") + e.what());
  }
  return out;
}

std::vector<AttributePair> normalize_attribute(std::string_view raw_name, std::string_view raw_value) {
  std::string name = text::normalize_key(raw_name);
  std::string value = text::normalize_key(raw_value);
  if (name.empty() || value.empty()) return {};

  const bool max_name = one_of(name, kMaxNames);
  const bool min_name = one_of(name, kMinNames);
  if (max_name || min_name || one_of(name, kRangeNames)) {
    std::string_view rest = value;
    std::optional<double> low;
    std::optional<double> high;
    if (auto n = starts_with_any(rest, kUpperWords)) {
      high = text::parse_amount(text::trim(rest.substr(*n)));
    } else if (auto n2 = starts_with_any(rest, kLowerWords)) {
      low = text::parse_amount(text::trim(rest.substr(*n2)));
    } else if (auto dash = value.find('-'); dash != std::string::npos && dash > 0) {
      low = text::parse_amount(text::trim(value.substr(0, dash)));
      high = text::parse_amount(text::trim(value.substr(dash + 1)));
      if (!low || !high) low = high = std::nullopt;
    } else if (auto amount = text::parse_amount(value)) {
      // A bare amount reads as a budget unless the name says minimum.
      (min_name ? low : high) = amount;
    }
    std::vector<AttributePair> out;
    if (low && *low >= 0) out.push_back({"price_min", text::format_number(*low)});
    if (high && *high >= 0) out.push_back({"price_max", text::format_number(*high)});
    if (!out.empty()) return out;
    // Unparseable price wording ("cheap") stays a soft attribute.
    return {{max_name || min_name ? "price" : name, value}};
  }
  return {{name, value}};
}

void promote_price_constraints(StructuredQuery& query) {
  bool have_max = false;
  bool have_min = false;
  std::vector<AttributePair> kept;
  for (auto& pair : query.attributes) {
    const bool is_max = pair.name == "price_max";
    const bool is_min = pair.name == "price_min";
    if (!is_max && !is_min) {
      kept.push_back(std::move(pair));
      continue;
    }
    auto amount = text::parse_amount(pair.value);
    if (!amount) continue;
    bool& seen = is_max ? have_max : have_min;
    if (seen) continue;
    seen = true;
    (is_max ? query.hard_constraints.price_max : query.hard_constraints.price_min) = *amount;
    kept.push_back(std::move(pair));
  }
  query.attributes = std::move(kept);
}

std::vector<AttributePair> extract_attributes(std::string_view query, const LlmContext& llm,
                                              const Stage1Context& context) {
  if (text::trim(query).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "query must not be empty", context.trace_id);
  }
  const std::string trace_id =
      context.trace_id.empty() ? default_trace_id(query, context) : context.trace_id;
  auto response = call(llm, "stage1.attrs",
                       {{"query", std::string(query)}, {"profile", profile_prompt_text(context.profile)}},
                       context, trace_id);
  std::vector<AttributePair> out;
  if (!response.parsed) return out;
  for (const auto& item : *response.parsed) {
    append_unique(out, normalize_attribute(value_string(item.value("name", nlohmann::json())),
                                           value_string(item.value("value", nlohmann::json()))));
  }
  return out;
}

StructuredQuery formulate_query(const std::vector<AttributePair>& attributes, const LlmContext& llm,
                                const Stage1Context& context, std::string_view query) {
  const std::string trace_id =
      context.trace_id.empty() ? default_trace_id(query, context) : context.trace_id;
  auto response = call(llm, "stage1.formulate",
                       {{"query", std::string(query)},
                        {"attributes", attributes_text(attributes)},
                        {"profile", profile_prompt_text(context.profile)}},
                       context, trace_id);

  StructuredQuery out;
  // Extracted attributes come first so their price bounds win over anything the
  // formulation step restates.
  out.attributes = attributes;
  if (response.parsed && response.parsed->is_object()) {
    const auto& doc = *response.parsed;
    out.category = text::normalize_key(string_field(doc, "category"));
    for (const auto& item : doc.value("attributes", nlohmann::json::array())) {
      append_unique(out.attributes,
                    normalize_attribute(value_string(item.value("name", nlohmann::json())),
                                        value_string(item.value("value", nlohmann::json()))));
    }
    for (const auto& v : doc.value("values", nlohmann::json::array())) {
      if (!v.is_string()) continue;
      std::string term = text::normalize_key(v.get<std::string>());
      if (!term.empty() && std::find(out.values.begin(), out.values.end(), term) == out.values.end()) {
        out.values.push_back(std::move(term));
      }
    }
  }
  promote_price_constraints(out);
  return out;
}

std::vector<HypotheticalProduct> generate_hypothetical_products(
    const StructuredQuery& structured_query, const LlmContext& llm, const Stage1Context& context,
    std::string_view query, std::vector<std::string>* notes, std::string* rendered_prompt) {
  const std::string trace_id =
      context.trace_id.empty() ? default_trace_id(query, context) : context.trace_id;
  auto response = call(llm, "stage1.hyde",
                       {{"query", std::string(query)},
                        {"structured_query", to_json(structured_query).dump()},
                        {"profile", profile_prompt_text(context.profile)}},
                       context, trace_id, rendered_prompt);

  std::vector<HypotheticalProduct> candidates;
  if (response.parsed) candidates = hypotheticals_from_json(*response.parsed);
  if (candidates.size() > kMaxHypotheticals) {
    if (notes) {
      notes->push_back("truncated " + std::to_string(candidates.size()) + " hypotheticals to " +
                       std::to_string(kMaxHypotheticals));
    }
    candidates.resize(kMaxHypotheticals);
  }
  std::vector<HypotheticalProduct> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (candidates[i].valid()) {
      out.push_back(std::move(candidates[i]));
    } else if (notes) {
      notes->push_back("dropped hypothetical #" + std::to_string(i) +
                       ": needs a category and a specific or generic item");
    }
  }
  if (out.empty()) {
    throw Error(ErrorCode::kGeneration, "no valid hypothetical products generated", trace_id);
  }
  return out;
}

Stage1Output run_stage1(std::string_view query, const LlmContext& llm, const Stage1Context& context) {
  const auto started = std::chrono::steady_clock::now();
  Stage1Context ctx = context;
  if (ctx.trace_id.empty()) ctx.trace_id = default_trace_id(query, context);

  Stage1Output out;
  out.trace_id = ctx.trace_id;
  out.query = std::string(query);
  auto attributes = extract_attributes(query, llm, ctx);
  out.structured_query = formulate_query(attributes, llm, ctx, query);
  out.hypotheticals = generate_hypothetical_products(out.structured_query, llm, ctx, query,
                                                     &out.notes, &out.hyde_prompt);
  out.timing = {Stage::kStage1Formulation,
                std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count(),
                out.trace_id};
  return out;
}

}  // namespace commerce
