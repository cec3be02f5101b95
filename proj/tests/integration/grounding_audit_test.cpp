#include <gtest/gtest.h>

#include "commerce/agent/inventory.hpp"
#include "commerce/agent/orchestrator.hpp"
#include "commerce/personalization.hpp"
#include "test_support.hpp"

namespace commerce::agent {
namespace {

UserProfile profile(const std::string& user, std::map<std::string, double> categories,
                    std::map<std::string, double> brands) {
  UserProfile p;
  p.user_id = user;
  p.category_affinity = std::move(categories);
  p.brand_affinity = std::move(brands);
  return p;
}

class GroundingAudit : public ::testing::TestWithParam<bool> {};

// Every product the agent surfaces exists and satisfies the constraints in force,
// with and without model re-ranking.
TEST_P(GroundingAudit, ZeroViolationsAcrossConversations) {
  auto stub = testing::make_fixture_llm();
  Inventory inventory(std::make_shared<HashingEmbedder>());
  inventory.install(testing::fixture_catalog());
  ProfileStore profiles;
  profiles.put(profile("skier", {{"apparel/gloves", 1.0}, {"electronics", 0.4}}, {{"salomon", 1.0}}));
  profiles.put(profile("runner", {{"shoes/running", 1.0}}, {{"nike", 0.7}}));
  SessionStore sessions;
  OrchestratorOptions options;
  options.llm_rerank = GetParam();
  Orchestrator orchestrator(inventory, profiles, sessions, stub->llm, options);

  testing::GroundingAuditor auditor;
  auto turns = testing::run_audited_conversations(orchestrator, sessions, *testing::fixture_catalog(),
                                                  auditor, {"skier", "runner"});
  EXPECT_GE(turns, 200u);
  EXPECT_GT(auditor.products_checked(), 0u);
  EXPECT_TRUE(auditor.violations().empty()) << auditor.violations().front();
}

INSTANTIATE_TEST_SUITE_P(Rerank, GroundingAudit, ::testing::Bool());

// A model that invents ids during re-ranking cannot smuggle them out.
TEST(GroundingAudit, HallucinatedRerankIdsNeverSurface) {
  auto script = testing::fixture_script();
  script.rules.insert(script.rules.begin(),
                      testing::rule("rank.rerank", nlohmann::json::array({{{"product_id", "p9999"}},
                                                                          {{"product_id", "fake-1"}}})));
  auto stub = testing::make_stub_llm(script);
  Inventory inventory(std::make_shared<HashingEmbedder>());
  inventory.install(testing::fixture_catalog());
  ProfileStore profiles;
  SessionStore sessions;
  OrchestratorOptions options;
  options.llm_rerank = true;
  Orchestrator orchestrator(inventory, profiles, sessions, stub->llm, options);
  auto sid = sessions.create();
  auto turn = orchestrator.handle_turn(sid, testing::kSkiQuery);
  ASSERT_FALSE(turn.products.empty());
  testing::GroundingAuditor auditor;
  auditor.check_turn(turn, *testing::fixture_catalog(), sessions.get(sid)->constraints);
  EXPECT_TRUE(auditor.violations().empty());
  EXPECT_NE(std::find(turn.notes.begin(), turn.notes.end(), "rerank dropped unknown id 'p9999'"),
            turn.notes.end());
}

}  // namespace
}  // namespace commerce::agent
