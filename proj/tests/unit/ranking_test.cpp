#include <gtest/gtest.h>

#include "commerce/errors.hpp"
#include "commerce/ranking.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

using testing::rule;

CatalogHandle small_catalog() {
  std::vector<Product> products;
  for (const char* id : {"A", "B", "C", "D"}) {
    Product p;
    p.id = id;
    p.title = std::string("Item ") + id;
    p.category = id == std::string("B") ? "apparel/gloves" : "electronics";
    p.brand = "acme";
    products.push_back(p);
  }
  return Catalog::from_products(products);
}

TEST(RankWeights, Validation) {
  RankWeights{}.validate();
  EXPECT_THROW((RankWeights{0.5, 0.6}.validate()), Error);
  EXPECT_THROW((RankWeights{1.2, -0.2}.validate()), Error);
}

// Frozen fusion values: a strong profile match overtakes a higher raw similarity.
TEST(RankTopK, ProfileAffinityReordersFrozen) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  auto catalog = small_catalog();
  UserProfile profile;
  profile.category_affinity = {{"apparel/gloves", 1.0}};
  profile.brand_affinity = {{"other", 1.0}};
  profile.options.category_weight = 1.0;
  profile.options.brand_weight = 0.0;
  std::vector<RetrievalResult> candidates = {{"A", 0.9, {0}, true}, {"B", 0.6, {0}, true}};
  auto ranked = rank_top_k(candidates, &profile, *catalog, 10);
  ASSERT_EQ(ranked.items.size(), 2u);
  EXPECT_EQ(ranked.items[0].product_id, "B");
  EXPECT_NEAR(ranked.items[0].fused, frozen["fusion_B"].get<double>(), 1e-12);
  EXPECT_NEAR(ranked.items[1].fused, frozen["fusion_A"].get<double>(), 1e-12);
  EXPECT_EQ(ranked.items[0].rank, 1u);
  EXPECT_EQ(ranked.items[1].rank, 2u);

  auto plain = rank_top_k(candidates, nullptr, *catalog, 10);
  EXPECT_EQ(plain.items[0].product_id, "A");
}

TEST(RankTopK, TieBreaksAndCut) {
  auto catalog = small_catalog();
  std::vector<RetrievalResult> candidates = {
      {"D", 0.5, {0}, true}, {"C", 0.5, {0}, true}, {"A", 1.5, {0}, true}, {"B", -0.2, {0}, true}};
  auto ranked = rank_top_k(candidates, nullptr, *catalog, 3);
  ASSERT_EQ(ranked.items.size(), 3u);
  EXPECT_EQ(ranked.items[0].product_id, "A");
  EXPECT_DOUBLE_EQ(ranked.items[0].retrieval, 1.0);
  EXPECT_EQ(ranked.items[1].product_id, "C");
  EXPECT_EQ(ranked.items[2].product_id, "D");
  EXPECT_TRUE(rank_top_k({}, nullptr, *catalog, 3).items.empty());
}

TEST(RankTopK, UnknownIdIsGroundingError) {
  auto catalog = small_catalog();
  try {
    rank_top_k({{"ghost", 0.9, {0}, true}}, nullptr, *catalog, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kGrounding);
  }
}

RankedList three_items(const Catalog& catalog) {
  return rank_top_k({{"A", 0.9, {0}, true}, {"B", 0.8, {0}, true}, {"C", 0.7, {0}, true}}, nullptr,
                    catalog, 3);
}

TEST(LlmRerank, ReordersDropsUnknownAppendsOmitted) {
  auto catalog = small_catalog();
  StubScript script;
  script.rules.push_back(rule("rank.rerank", nlohmann::json::array({
                                                 {{"product_id", "C"}, {"explanation", "best fit"}},
                                                 {{"product_id", "ghost"}},
                                                 {{"product_id", "A"}},
                                             })));
  auto stub = testing::make_stub_llm(script);
  auto out = llm_rerank(three_items(*catalog), nullptr, *catalog, stub->llm, "q");
  ASSERT_EQ(out.items.size(), 3u);
  EXPECT_EQ(out.items[0].product_id, "C");
  EXPECT_EQ(out.items[0].explanation, "best fit");
  EXPECT_EQ(out.items[1].product_id, "A");
  EXPECT_EQ(out.items[2].product_id, "B");
  EXPECT_EQ(out.items[2].rank, 3u);
  EXPECT_FALSE(out.degraded);
  ASSERT_EQ(out.notes.size(), 1u);
  EXPECT_EQ(out.notes[0], "rerank dropped unknown id 'ghost'");
}

TEST(LlmRerank, FailureDegradesToInputOrder) {
  auto catalog = small_catalog();
  StubScript script;
  script.rules.push_back(testing::text_rule("rank.rerank", "no idea"));
  auto stub = testing::make_stub_llm(script);
  auto input = three_items(*catalog);
  auto out = llm_rerank(input, nullptr, *catalog, stub->llm, "q", "tr-9");
  EXPECT_TRUE(out.degraded);
  ASSERT_EQ(out.items.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(out.items[i].product_id, input.items[i].product_id);
  ASSERT_EQ(out.notes.size(), 1u);
  EXPECT_EQ(out.notes[0], "rerank skipped: validation_error (tr-9)");
}

TEST(RankedList, Json) {
  auto catalog = small_catalog();
  auto json = to_json(three_items(*catalog));
  EXPECT_EQ(json["items"].size(), 3u);
  EXPECT_EQ(json["items"][0]["product_id"], "A");
  EXPECT_EQ(json["degraded"], false);
}

}  // namespace
}  // namespace commerce
