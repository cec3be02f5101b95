#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/bench.hpp"
#include "commerce/catalog.hpp"
#include "commerce/personalization.hpp"
#include "commerce/prompt_templates.hpp"

// Stage 1: attribute extraction, structured query formulation and hypothetical
// product (HyDE) generation. Each step is one templated model call.
namespace commerce {

struct AttributePair {
  std::string name;
  std::string value;

  bool operator==(const AttributePair&) const = default;
};

struct StructuredQuery {
  std::string category;
  std::vector<AttributePair> attributes;
  std::vector<std::string> values;  // expansion terms
  FilterConstraints hard_constraints;

  bool operator==(const StructuredQuery&) const = default;
};

struct HypotheticalProduct {
  std::string category;
  std::string specific_item;
  std::string generic_item;
  std::string relevance_note;

  bool operator==(const HypotheticalProduct&) const = default;
  bool valid() const;
  // Text embedded for retrieval: category, specific and generic item.
  std::string query_text() const;
};

inline constexpr std::size_t kMaxHypotheticals = 8;

struct Stage1Output {
  std::string trace_id;
  std::string query;
  StructuredQuery structured_query;
  std::vector<HypotheticalProduct> hypotheticals;
  StageTiming timing;
  std::string hyde_prompt;         // rendered user prompt of the generation call
  std::vector<std::string> notes;  // dropped entries, normalization remarks
};

nlohmann::json to_json(const AttributePair& pair);
nlohmann::json to_json(const StructuredQuery& query);
nlohmann::json to_json(const HypotheticalProduct& product);
nlohmann::json hypotheticals_to_json(const std::vector<HypotheticalProduct>& products);
nlohmann::json to_json(const Stage1Output& output);
// Throws Error(kParse) on missing or mistyped fields.
Stage1Output stage1_output_from_json(const nlohmann::json& json);
std::vector<HypotheticalProduct> hypotheticals_from_json(const nlohmann::json& json);

// Normalizes one extracted pair. Price phrasing is mapped onto price_max / price_min
// with a plain number ("price" = "under $100" -> ("price_max", "100")). Returns
// nothing when the pair is empty after normalization.
std::vector<AttributePair> normalize_attribute(std::string_view name, std::string_view value);

// Mirrors every price_max / price_min attribute into `query.hard_constraints`
// (first occurrence wins; later duplicates are removed from the attribute list).
void promote_price_constraints(StructuredQuery& query);

// Optional per-turn context threaded through the model calls.
struct Stage1Context {
  const UserProfile* profile = nullptr;
  std::vector<ChatMessage> history;  // earlier conversation turns
  std::string trace_id;              // generated when empty
};

std::vector<AttributePair> extract_attributes(std::string_view query, const LlmContext& llm,
                                              const Stage1Context& context = {});

StructuredQuery formulate_query(const std::vector<AttributePair>& attributes, const LlmContext& llm,
                                const Stage1Context& context = {}, std::string_view query = {});

std::vector<HypotheticalProduct> generate_hypothetical_products(
    const StructuredQuery& structured_query, const LlmContext& llm,
    const Stage1Context& context = {}, std::string_view query = {},
    std::vector<std::string>* notes = nullptr, std::string* rendered_prompt = nullptr);

// extract -> formulate -> generate, strictly in sequence. The first failing step
// aborts with its error (tagged with the trace id).
Stage1Output run_stage1(std::string_view query, const LlmContext& llm,
                        const Stage1Context& context = {});

}  // namespace commerce
