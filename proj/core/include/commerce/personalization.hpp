#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/catalog.hpp"

namespace commerce {

struct LlmContext;

using Timestamp = std::chrono::sys_seconds;

// "2025-03-01T12:00:00Z" (a trailing 'Z' or "+00:00" is required; fractional seconds
// are accepted and dropped). Throws Error(kParse).
Timestamp parse_timestamp(const std::string& iso8601);
std::string format_timestamp(Timestamp ts);

struct PurchaseEvent {
  std::string user_id;
  std::string product_id;
  std::string category;
  std::string brand;
  Price price;
  Timestamp timestamp;
};

PurchaseEvent purchase_event_from_json(const nlohmann::json& json);

struct ProfileOptions {
  double half_life_days = 90.0;
  double category_weight = 0.5;
  double brand_weight = 0.5;
};

struct UserProfile {
  std::string user_id;
  std::map<std::string, double> category_affinity;  // normalized category path -> [0,1]
  std::map<std::string, double> brand_affinity;     // normalized brand -> [0,1]
  std::optional<std::string> demographics_note;
  std::optional<std::string> llm_summary;
  Timestamp built_at{};
  ProfileOptions options;

  bool empty() const { return category_affinity.empty() && brand_affinity.empty(); }
};

nlohmann::json to_json(const UserProfile& profile);
UserProfile user_profile_from_json(const nlohmann::json& json);

// Compact text form for prompts: "categories: a 1.00, b 0.50; brands: x 1.00".
// Ordered by weight descending, then key.
std::string profile_prompt_text(const UserProfile* profile);

// Recency-weighted affinities: every event adds 0.5^(age_days / half_life) to its
// category and brand (events dated after `now` count as age 0); each map is then
// scaled so its largest weight is 1. When `llm` is given, one "profile.summary" call
// fills llm_summary; a failed call leaves it empty. Throws Error(kInvalidArgument)
// when events belong to more than one user.
UserProfile build_profile(std::vector<PurchaseEvent> events,
                          const std::optional<std::string>& demographics, Timestamp now,
                          const LlmContext* llm = nullptr, ProfileOptions options = {});

// category_weight * (best category affinity over the product's path prefixes) +
// brand_weight * brand affinity. 0 for a null or empty profile.
double affinity(const UserProfile* profile, const Product& product);

}  // namespace commerce
