#include <gtest/gtest.h>

#include "commerce/errors.hpp"
#include "commerce/retrieval.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

class RetrievalTest : public ::testing::Test {
 protected:
  CatalogHandle catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  VectorIndex index = build_vector_index(*catalog, embedder);
};

TEST(MergeCandidates, BestScoreAndSourceUnion) {
  std::vector<std::vector<ScoredId>> hits = {{{"a", 0.5}, {"b", 0.4}}, {{"b", 0.9}, {"c", 0.4}}};
  auto merged = merge_candidates(hits, 10);
  ASSERT_EQ(merged.size(), 3u);
  EXPECT_EQ(merged[0], (RetrievalResult{"b", 0.9, {0, 1}, true}));
  EXPECT_EQ(merged[1], (RetrievalResult{"a", 0.5, {0}, true}));
  EXPECT_EQ(merged[2], (RetrievalResult{"c", 0.4, {1}, true}));
  EXPECT_EQ(merge_candidates(hits, 1).size(), 1u);
}

TEST_F(RetrievalTest, SkiingSurfacesPowerBanksFromTheirHypothetical) {
  auto stub = testing::make_fixture_llm();
  auto stage1 = run_stage1(testing::kSkiQuery, stub->llm);
  auto results = retrieve(stage1, *catalog, index, embedder);
  ASSERT_FALSE(results.empty());
  EXPECT_LE(results.size(), 20u);
  bool power_bank_from_h1 = false;
  for (const auto& r : results) {
    const Product* p = catalog->find(r.product_id);
    ASSERT_NE(p, nullptr);
    EXPECT_TRUE(p->in_stock);
    bool from_h1 = std::find(r.sources.begin(), r.sources.end(), 1u) != r.sources.end();
    if (from_h1 && p->category == "electronics/power-banks") power_bank_from_h1 = true;
  }
  EXPECT_TRUE(power_bank_from_h1);
}

TEST_F(RetrievalTest, HardConstraintsRespected) {
  auto stub = testing::make_fixture_llm();
  auto stage1 = run_stage1("running shoes under $100", stub->llm);
  ASSERT_EQ(stage1.structured_query.hard_constraints.price_max, 100.0);
  auto results = retrieve(stage1, *catalog, index, embedder);
  ASSERT_FALSE(results.empty());
  for (const auto& r : results) {
    EXPECT_LE(catalog->find(r.product_id)->price.amount, 100.0);
    EXPECT_TRUE(r.passed_hard_filter);
  }
}

TEST_F(RetrievalTest, UnsatisfiableFilterIsEmpty) {
  Stage1Output stage1;
  stage1.hypotheticals = {{"Power Banks", "x", "y", ""}};
  stage1.structured_query.hard_constraints.price_max = -1;
  EXPECT_TRUE(retrieve(stage1, *catalog, index, embedder).empty());
}

TEST_F(RetrievalTest, MismatchedIndexRejected) {
  Stage1Output stage1;
  stage1.trace_id = "t";
  stage1.hypotheticals = {{"Power Banks", "x", "y", ""}};
  auto other = ingest_catalog_file(testing::data_path("fixtures/catalog_500.jsonl").string()).catalog;
  try {
    retrieve(stage1, *other, index, embedder);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexMismatch);
    EXPECT_EQ(e.trace_id(), "t");
  }
  HashingEmbedder small(64);
  EXPECT_THROW(retrieve(stage1, *catalog, index, small), Error);
}

TEST_F(RetrievalTest, MatchesBruteForceOnRandomInputs) {
  std::mt19937_64 rng(1234);
  for (int round = 0; round < 15; ++round) {
    auto stage1 = testing::random_stage1(rng, *catalog);
    auto fast = retrieve(stage1, *catalog, index, embedder);
    auto slow = brute_force_retrieve(stage1, *catalog, embedder);
    ASSERT_EQ(fast.size(), slow.size());
    for (std::size_t i = 0; i < fast.size(); ++i) {
      EXPECT_EQ(fast[i].product_id, slow[i].product_id);
      EXPECT_NEAR(fast[i].score, slow[i].score, 1e-9);
      EXPECT_EQ(fast[i].sources, slow[i].sources);
    }
  }
}

}  // namespace
}  // namespace commerce
