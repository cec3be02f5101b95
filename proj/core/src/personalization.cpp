#include "commerce/personalization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include <fmt/format.h>

#include "commerce/errors.hpp"
#include "commerce/llm_gateway.hpp"
#include "commerce/prompt_templates.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

void max_normalize(std::map<std::string, double>& weights) {
  double max_weight = 0.0;
  for (const auto& [key, w] : weights) max_weight = std::max(max_weight, w);
  if (max_weight <= 0.0) return;
  for (auto& [key, w] : weights) w /= max_weight;
}

std::string weights_text(const std::map<std::string, double>& weights) {
  std::vector<std::pair<std::string, double>> sorted(weights.begin(), weights.end());
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::string out;
  for (const auto& [key, w] : sorted) {
    if (!out.empty()) out += ", ";
    out += fmt::format("{} {:.2f}", key, w);
  }
  return out.empty() ? "none" : out;
}

}  // namespace

Timestamp parse_timestamp(const std::string& iso8601) {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0, consumed = 0;
  if (std::sscanf(iso8601.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &year, &month, &day, &hour,
                  &minute, &second, &consumed) != 6) {
    throw Error(ErrorCode::kParse, "invalid timestamp '" + iso8601 + "'");
  }
  std::string_view rest = std::string_view(iso8601).substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') rest.remove_prefix(1);
  }
  if (rest != "Z" && rest != "+00:00") {
    throw Error(ErrorCode::kParse, "timestamp must be UTC: '" + iso8601 + "'");
  }
  using namespace std::chrono;
  year_month_day date{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                      std::chrono::day{static_cast<unsigned>(day)}};
  if (!date.ok() || hour > 23 || minute > 59 || second > 60) {
    throw Error(ErrorCode::kParse, "invalid timestamp '" + iso8601 + "'");
  }
  return sys_days{date} + hours{hour} + minutes{minute} + seconds{second};
}

std::string format_timestamp(Timestamp ts) {
  using namespace std::chrono;
  auto day_point = floor<days>(ts);
  year_month_day date{day_point};
  hh_mm_ss<seconds> time{ts - day_point};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(date.year()),
                     static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()),
                     time.hours().count(), time.minutes().count(), time.seconds().count());
}

PurchaseEvent purchase_event_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw Error(ErrorCode::kParse, "purchase event must be an object");
  PurchaseEvent event;
  try {
    event.user_id = json.at("user_id").get<std::string>();
    event.product_id = json.value("product_id", std::string{});
    event.category = json.at("category").get<std::string>();
    event.brand = json.value("brand", std::string{});
    event.price.amount = json.value("price", 0.0);
    event.price.currency = json.value("currency", std::string{"USD"});
    event.timestamp = parse_timestamp(json.at("timestamp").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("purchase event: ") + e.what());
  }
  if (text::normalize_category(event.category).empty()) {
    throw Error(ErrorCode::kParse, "purchase event has an empty category");
  }
  return event;
}

nlohmann::json to_json(const UserProfile& profile) {
  nlohmann::json out = {{"user_id", profile.user_id},
                        {"category_affinity", profile.category_affinity},
                        {"brand_affinity", profile.brand_affinity},
                        {"built_at", format_timestamp(profile.built_at)}};
  out["demographics_note"] =
      profile.demographics_note ? nlohmann::json(*profile.demographics_note) : nlohmann::json();
  out["llm_summary"] = profile.llm_summary ? nlohmann::json(*profile.llm_summary) : nlohmann::json();
  return out;
}

UserProfile user_profile_from_json(const nlohmann::json& json) {
  UserProfile profile;
  try {
    profile.user_id = json.at("user_id").get<std::string>();
    profile.category_affinity =
        json.value("category_affinity", std::map<std::string, double>{});
    profile.brand_affinity = json.value("brand_affinity", std::map<std::string, double>{});
    if (json.contains("demographics_note") && json["demographics_note"].is_string()) {
      profile.demographics_note = json["demographics_note"].get<std::string>();
    }
    if (json.contains("llm_summary") && json["llm_summary"].is_string()) {
      profile.llm_summary = json["llm_summary"].get<std::string>();
    }
    if (json.contains("built_at") && json["built_at"].is_string()) {
      profile.built_at = parse_timestamp(json["built_at"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("user profile: ") + e.what());
  }
  for (const auto* weights : {&profile.category_affinity, &profile.brand_affinity}) {
    for (const auto& [key, w] : *weights) {
      if (!(w >= 0.0 && w <= 1.0)) {
        throw Error(ErrorCode::kParse, "user profile weight out of [0,1] for '" + key + "'");
      }
    }
  }
  return profile;
}

std::string profile_prompt_text(const UserProfile* profile) {
  if (!profile || profile->empty()) return "none";
  std::string out = "categories: " + weights_text(profile->category_affinity) +
                    "; brands: " + weights_text(profile->brand_affinity);
  if (profile->llm_summary) out += "; summary: " + *profile->llm_summary;
  return out;
}

UserProfile build_profile(std::vector<PurchaseEvent> events,
                          const std::optional<std::string>& demographics, Timestamp now,
                          const LlmContext* llm, ProfileOptions options) {
  UserProfile profile;
  profile.options = options;
  profile.built_at = now;
  profile.demographics_note = demographics;
  for (const auto& event : events) {
    if (profile.user_id.empty()) profile.user_id = event.user_id;
    if (event.user_id != profile.user_id) {
      throw Error(ErrorCode::kInvalidArgument,
                  "purchase events mix users '" + profile.user_id + "' and '" + event.user_id + "'");
    }
  }

  // Summation order is fixed so any permutation of the events yields identical sums.
  std::sort(events.begin(), events.end(), [](const PurchaseEvent& a, const PurchaseEvent& b) {
    return std::tie(a.timestamp, a.product_id, a.category, a.brand, a.price.amount) <
           std::tie(b.timestamp, b.product_id, b.category, b.brand, b.price.amount);
  });
  for (const auto& event : events) {
    double age_days =
        std::chrono::duration<double>(now - event.timestamp).count() / 86400.0;
    double weight = std::pow(0.5, std::max(0.0, age_days) / options.half_life_days);
    std::string category = text::normalize_category(event.category);
    if (!category.empty()) profile.category_affinity[category] += weight;
    std::string brand = text::normalize_key(event.brand);
    if (!brand.empty()) profile.brand_affinity[brand] += weight;
  }
  max_normalize(profile.category_affinity);
  max_normalize(profile.brand_affinity);

  if (llm && !events.empty()) {
    try {
      auto call = render_call(*llm, "profile.summary",
                              {{"profile", profile_prompt_text(&profile)},
                               {"demographics", demographics.value_or("unknown")}});
      auto response = complete_chat(llm->backend, call.request);
      std::string summary = text::trim(response.raw_text);
      if (!summary.empty()) profile.llm_summary = std::move(summary);
    } catch (const Error&) {
      // The summary is advisory; the numeric profile stands on its own.
    }
  }
  return profile;
}

double affinity(const UserProfile* profile, const Product& product) {
  if (!profile || profile->empty()) return 0.0;
  double best_category = 0.0;
  std::string prefix;
  for (const auto& segment : text::split_category(product.category)) {
    if (!prefix.empty()) prefix += '/';
    prefix += segment;
    if (auto it = profile->category_affinity.find(prefix); it != profile->category_affinity.end()) {
      best_category = std::max(best_category, it->second);
    }
  }
  double brand = 0.0;
  if (auto it = profile->brand_affinity.find(text::normalize_key(product.brand));
      it != profile->brand_affinity.end()) {
    brand = it->second;
  }
  double score = profile->options.category_weight * best_category +
                 profile->options.brand_weight * brand;
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace commerce
