#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "commerce/errors.hpp"
#include "commerce/personalization.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

PurchaseEvent event(std::string category, std::string brand, std::string when,
                    std::string user = "u1", std::string product = "p") {
  return {std::move(user), std::move(product), std::move(category), std::move(brand), {10, "USD"},
          parse_timestamp(when)};
}

const auto kNow = parse_timestamp("2025-06-01T00:00:00Z");

TEST(Timestamp, ParseAndFormat) {
  EXPECT_EQ(format_timestamp(parse_timestamp("2025-03-01T12:00:00Z")), "2025-03-01T12:00:00Z");
  EXPECT_EQ(format_timestamp(parse_timestamp("2025-03-01T12:00:00.250+00:00")), "2025-03-01T12:00:00Z");
  EXPECT_THROW(parse_timestamp("2025-03-01T12:00:00"), Error);
  EXPECT_THROW(parse_timestamp("2025-02-30T00:00:00Z"), Error);
  EXPECT_THROW(parse_timestamp("yesterday"), Error);
}

// Frozen: a purchase 90 days old weighs half of one made today.
TEST(BuildProfile, HalfLifeDecay) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  auto decay = frozen["decay_weights_0_and_90_days"];
  auto profile = build_profile({event("Apparel/Gloves", "Acme", "2025-06-01T00:00:00Z"),
                                event("Electronics", "Zed", "2025-03-03T00:00:00Z")},
                               std::nullopt, kNow);
  EXPECT_NEAR(profile.category_affinity.at("apparel/gloves"), decay[0].get<double>(), 1e-12);
  EXPECT_NEAR(profile.category_affinity.at("electronics"), decay[1].get<double>(), 1e-12);
  EXPECT_NEAR(profile.brand_affinity.at("zed"), 0.5, 1e-12);
}

TEST(BuildProfile, EmptyHistoryGivesEmptyProfile) {
  auto profile = build_profile({}, std::string("student"), kNow);
  EXPECT_TRUE(profile.empty());
  EXPECT_EQ(profile.demographics_note, "student");
  Product p;
  p.category = "a";
  EXPECT_EQ(affinity(&profile, p), 0.0);
  EXPECT_EQ(affinity(nullptr, p), 0.0);
}

TEST(BuildProfile, MixedUsersRejected) {
  EXPECT_THROW(build_profile({event("a", "b", "2025-01-01T00:00:00Z", "u1"),
                              event("a", "b", "2025-01-01T00:00:00Z", "u2")},
                             std::nullopt, kNow),
               Error);
}

TEST(BuildProfile, PermutationInvariant) {
  std::vector<PurchaseEvent> events;
  std::mt19937_64 rng(3);
  for (int i = 0; i < 40; ++i) {
    events.push_back(event("cat/" + std::to_string(rng() % 5), "brand" + std::to_string(rng() % 4),
                           "2025-0" + std::to_string(1 + rng() % 5) + "-1" + std::to_string(rng() % 10) +
                               "T0" + std::to_string(rng() % 10) + ":00:00Z",
                           "u1", "p" + std::to_string(i)));
  }
  auto base = to_json(build_profile(events, std::nullopt, kNow)).dump();
  for (int round = 0; round < 10; ++round) {
    std::shuffle(events.begin(), events.end(), rng);
    EXPECT_EQ(to_json(build_profile(events, std::nullopt, kNow)).dump(), base);
  }
}

TEST(BuildProfile, SummaryFromModelAndFailureTolerated) {
  auto stub = testing::make_fixture_llm();
  auto profile = build_profile({event("apparel", "acme", "2025-05-01T00:00:00Z")}, std::nullopt, kNow,
                               &stub->llm);
  EXPECT_EQ(profile.llm_summary, "Outdoor shopper who buys winter gear.");

  StubScript failing;
  StubRule r;
  r.template_id = "profile.summary";
  r.fail = "transport";
  failing.rules.push_back(r);
  auto broken = testing::make_stub_llm(failing);
  auto plain = build_profile({event("apparel", "acme", "2025-05-01T00:00:00Z")}, std::nullopt, kNow,
                             &broken->llm);
  EXPECT_FALSE(plain.llm_summary.has_value());
  EXPECT_FALSE(plain.empty());
}

TEST(Affinity, FrozenCombination) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  UserProfile profile;
  profile.category_affinity = {{"apparel", 0.3}, {"apparel/gloves", 0.8}};
  profile.brand_affinity = {{"acme", 0.4}};
  Product p;
  p.category = "apparel/gloves/heated";
  p.brand = "ACME";
  EXPECT_NEAR(affinity(&profile, p), frozen["affinity_0.8_0.4"].get<double>(), 1e-12);
}

TEST(Profile, JsonRoundTripAndBounds) {
  auto profile = build_profile({event("apparel", "acme", "2025-05-01T00:00:00Z")}, std::string("n"), kNow);
  auto back = user_profile_from_json(to_json(profile));
  EXPECT_EQ(to_json(back), to_json(profile));
  EXPECT_THROW(user_profile_from_json({{"user_id", "u"}, {"category_affinity", {{"a", 1.5}}}}), Error);
}

TEST(Profile, PromptText) {
  UserProfile profile;
  profile.category_affinity = {{"b", 0.5}, {"a", 1.0}};
  profile.brand_affinity = {{"x", 1.0}};
  EXPECT_EQ(profile_prompt_text(&profile), "categories: a 1.00, b 0.50; brands: x 1.00");
  EXPECT_EQ(profile_prompt_text(nullptr), "none");
}

TEST(PurchaseEvent, FromJson) {
  auto e = purchase_event_from_json({{"user_id", "u"}, {"category", "A/B"}, {"timestamp", "2025-01-01T00:00:00Z"}});
  EXPECT_EQ(e.price.currency, "USD");
  EXPECT_THROW(purchase_event_from_json({{"user_id", "u"}, {"category", " "}, {"timestamp", "2025-01-01T00:00:00Z"}}), Error);
  EXPECT_THROW(purchase_event_from_json({{"user_id", "u"}}), Error);
}

}  // namespace
}  // namespace commerce
