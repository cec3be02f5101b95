#include <gtest/gtest.h>

#include <set>

#include "commerce/agent/inventory.hpp"
#include "commerce/agent/orchestrator.hpp"
#include "commerce/agent/search_pipeline.hpp"
#include "commerce/retrieval.hpp"
#include "test_support.hpp"

namespace commerce::agent {
namespace {

class AgentFlow : public ::testing::Test {
 protected:
  void SetUp() override {
    inventory.install(testing::fixture_catalog());
    orchestrator = std::make_unique<Orchestrator>(inventory, profiles, sessions, stub->llm);
  }
  std::unique_ptr<testing::StubLlm> stub = testing::make_fixture_llm();
  Inventory inventory{std::make_shared<HashingEmbedder>()};
  ProfileStore profiles;
  SessionStore sessions;
  std::unique_ptr<Orchestrator> orchestrator;
};

// The skiing example end to end: four hypothetical categories, grounded products
// drawn from several of them, identical output on a second run.
TEST_F(AgentFlow, SkiingGoldenFlow) {
  auto catalog = testing::fixture_catalog();
  auto snap = inventory.snapshot();
  SearchDeps deps{*catalog, *snap->index, inventory.embedder(), stub->llm};
  SearchRequest request;
  request.query = testing::kSkiQuery;
  request.trace_id = "golden";
  auto first = run_search(request, deps);
  ASSERT_TRUE(first.ok());
  std::vector<std::string> categories;
  for (const auto& h : first.stage1.hypotheticals) categories.push_back(h.category);
  EXPECT_EQ(categories, (std::vector<std::string>{"Heated Tech Gloves", "Power Banks", "Action Cameras",
                                                  "Phone Cases"}));
  ASSERT_FALSE(first.ranked.items.empty());
  std::set<std::string> surfaced_categories;
  for (const auto& item : first.ranked.items) {
    const Product* p = catalog->find(item.product_id);
    ASSERT_NE(p, nullptr);
    EXPECT_TRUE(p->in_stock);
    surfaced_categories.insert(p->category);
  }
  EXPECT_TRUE(surfaced_categories.contains("electronics/power-banks"));
  EXPECT_TRUE(surfaced_categories.contains("apparel/gloves/heated"));

  auto second = run_search(request, deps);
  auto strip = [&](const SearchOutcome& o) {
    auto j = o.to_json(*catalog);
    j.erase("timings");
    return j.dump();
  };
  EXPECT_EQ(strip(first), strip(second));
}

TEST_F(AgentFlow, MultiTurnRefinementAndCart) {
  auto sid = sessions.create();
  auto t1 = orchestrator->handle_turn(sid, "find running shoes under $100 with good arch support");
  ASSERT_FALSE(t1.products.empty());
  for (const auto& item : t1.products) {
    const Product* p = testing::fixture_catalog()->find(item.product_id);
    EXPECT_LE(p->price.amount, 100.0);
    EXPECT_TRUE(p->in_stock);
  }
  auto t2 = orchestrator->handle_turn(sid, "add the first one to my cart");
  EXPECT_EQ(t2.intent, Intent::kCartAdd);
  EXPECT_EQ(sessions.get(sid)->cart, (std::vector<std::string>{t1.products[0].product_id}));

  auto t3 = orchestrator->handle_turn(sid, "running shoes over $150");
  auto constraints = sessions.get(sid)->constraints;
  EXPECT_EQ(constraints.price_min, 150.0);
  EXPECT_FALSE(constraints.price_max.has_value());
  for (const auto& item : t3.products) {
    EXPECT_GE(testing::fixture_catalog()->find(item.product_id)->price.amount, 150.0);
  }
  auto session = sessions.get(sid);
  EXPECT_EQ(session->turns.size(), 6u);
  EXPECT_EQ(session->turns[0].role, "user");
  EXPECT_EQ(session->turns[1].role, "agent");
}

TEST_F(AgentFlow, CartWithoutShownProductsAsksForClarification) {
  auto sid = sessions.create();
  auto reply = orchestrator->handle_turn(sid, "add the second one to my cart");
  EXPECT_EQ(reply.intent, Intent::kCartAdd);
  EXPECT_TRUE(sessions.get(sid)->cart.empty());
  EXPECT_NE(std::find(reply.notes.begin(), reply.notes.end(), "unresolved cart reference"), reply.notes.end());
}

TEST_F(AgentFlow, ProfileChangesRanking) {
  UserProfile skier;
  skier.user_id = "skier";
  skier.category_affinity = {{"apparel/gloves/heated", 1.0}};
  profiles.put(skier);
  auto plain = orchestrator->search(testing::kSkiQuery, std::nullopt, 10);
  auto personal = orchestrator->search(testing::kSkiQuery, std::string("skier"), 10);
  ASSERT_TRUE(plain.ok());
  ASSERT_TRUE(personal.ok());
  const auto& top = personal.ranked.items.front();
  EXPECT_EQ(testing::fixture_catalog()->find(top.product_id)->category, "apparel/gloves/heated");
  EXPECT_GT(top.affinity, 0.0);
  for (const auto& item : plain.ranked.items) EXPECT_EQ(item.affinity, 0.0);
}

TEST_F(AgentFlow, IntentFailureDegradesToSearch) {
  auto script = testing::fixture_script();
  StubRule broken;
  broken.template_id = "agent.intent";
  broken.fail = "transport";
  script.rules.insert(script.rules.begin(), broken);
  auto failing = testing::make_stub_llm(script);
  Orchestrator degraded(inventory, profiles, sessions, failing->llm);
  auto sid = sessions.create();
  auto reply = degraded.handle_turn(sid, testing::kSkiQuery);
  EXPECT_TRUE(reply.degraded);
  EXPECT_EQ(reply.intent, Intent::kSearch);
  EXPECT_FALSE(reply.products.empty());
  EXPECT_EQ(reply.notes.front(), "intent classification failed (transport_error), searching instead");
}

TEST_F(AgentFlow, SnapshotSurvivesConcurrentIngest) {
  std::shared_ptr<const Inventory::Snapshot> used;
  auto outcome = orchestrator->search(testing::kSkiQuery, std::nullopt, 5, {}, &used);
  std::stringstream replacement(R"({"id":"x1","title":"Only","category":"misc","price":1,"currency":"USD"})");
  inventory.ingest_stream(replacement);
  for (const auto& item : outcome.ranked.items) EXPECT_NE(used->catalog->find(item.product_id), nullptr);
  EXPECT_EQ(inventory.snapshot()->catalog->size(), 1u);
}

}  // namespace
}  // namespace commerce::agent
