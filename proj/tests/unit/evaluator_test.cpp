#include <gtest/gtest.h>

#include <fstream>

#include "commerce/bench.hpp"
#include "commerce/errors.hpp"
#include "commerce/evaluator.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

using testing::rule;

// Scores keyed by a marker in the judged output.
std::unique_ptr<testing::StubLlm> scripted_judge(const std::vector<int>& scores) {
  StubScript script;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    script.rules.push_back(rule("eval.quality", {{"score", scores[i]}, {"rationale", "r"}},
                                "[out-" + std::to_string(i) + "]"));
  }
  return testing::make_stub_llm(script);
}

std::vector<EvalItem> items(std::size_t n) {
  std::vector<EvalItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({"i" + std::to_string(i), "prompt", "answer [out-" + std::to_string(i) + "]"});
  }
  return out;
}

TEST(Rubrics, BuiltinAndVersioned) {
  auto registry = RubricRegistry::builtin();
  auto names = registry.names();
  EXPECT_EQ(names, (std::vector<std::string>{"attribute_extraction", "hyde_quality", "recommendation"}));
  const auto& rubric = registry.get("hyde_quality");
  EXPECT_EQ(rubric.version.size(), 12u);
  EXPECT_EQ(&registry.get(rubric.id()), &rubric);
  EXPECT_THROW(registry.get("hyde_quality@000000000000"), Error);
  EXPECT_THROW(registry.get("nope"), Error);

  testing::TempDir dir;
  std::ofstream(dir / "custom.txt") << "Score 0-5.";
  const auto& custom = registry.load_file((dir / "custom.txt").string());
  EXPECT_EQ(custom.name, "custom");
  EXPECT_THROW(registry.load_file((dir / "missing.txt").string()), Error);
}

// Frozen oracle: ten scripted scores average to 2.5.
TEST(JudgeBatch, MeanMatchesFrozenOracle) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  std::vector<int> scores = {2, 2, 3, 2, 3, 3, 2, 3, 2, 3};
  auto judge = scripted_judge(scores);
  auto rubric = RubricRegistry::builtin().get("recommendation");
  for (std::size_t concurrency : {1u, 4u}) {
    auto batch = judge_batch(items(scores.size()), rubric, judge->llm, concurrency);
    EXPECT_EQ(batch.values(), scores);
    ASSERT_TRUE(batch.mean().has_value());
    EXPECT_NEAR(*batch.mean(), frozen["batch_mean"].get<double>(), 1e-9);
    EXPECT_EQ(batch.rubric_id, rubric.id());
  }
}

TEST(JudgeBatch, FailuresRecordedAndSkipped) {
  StubScript script;
  script.rules.push_back(rule("eval.quality", {{"score", 9}}, "did not validate"));
  script.rules.push_back(rule("eval.quality", {{"score", 7}}, "[out-1]"));
  script.rules.push_back(rule("eval.quality", {{"score", 4}}));
  auto judge = testing::make_stub_llm(script);
  auto batch = judge_batch(items(3), RubricRegistry::builtin().get("recommendation"), judge->llm);
  EXPECT_EQ(batch.scored(), 2u);
  EXPECT_FALSE(batch.scores[1].has_value());
  ASSERT_EQ(batch.errors.size(), 1u);
  EXPECT_EQ(batch.errors[0].rfind("i1: validation_error", 0), 0u) << batch.errors[0];
  EXPECT_DOUBLE_EQ(*batch.mean(), 4.0);
  EXPECT_FALSE(BatchResult{}.mean().has_value());
}

TEST(E2E, EqualWeightMean) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  auto score = compute_e2e_score(2.49, 3.0, 3.6);
  EXPECT_NEAR(score.aggregate, frozen["e2e_aggregate_2.49_3.0_3.6"].get<double>(), 1e-9);
  EXPECT_THROW(compute_e2e_score(5.1, 3, 3), Error);
  EXPECT_THROW(compute_e2e_score(-0.1, 3, 3), Error);
}

TEST(AggregateDelta, QualityImprovement) {
  auto frozen = testing::read_json(testing::data_path("oracles/frozen/arithmetic.json"));
  auto d = aggregate_and_delta({2.49}, {2.03});
  ASSERT_TRUE(d.percent_delta.has_value());
  EXPECT_NEAR(*d.percent_delta, frozen["quality_2.03_to_2.49"].get<double>(), 1e-9);
  EXPECT_EQ(format_delta(d.percent_delta), "+22.7%");
  EXPECT_EQ(format_mean(2.5), "2.50");
  EXPECT_FALSE(aggregate_and_delta({1.0}, {0.0}).percent_delta.has_value());
  EXPECT_EQ(format_delta(std::nullopt), "n/a");
  EXPECT_THROW(aggregate_and_delta({}, {1.0}), Error);
}

TEST(Pairwise, PositionBiasedJudgeTies) {
  StubScript script;
  script.rules.push_back(rule("eval.pairwise", {{"winner", "first"}}));
  auto judge = testing::make_stub_llm(script);
  auto j = judge_pairwise("p", "answer one", "answer two", judge->llm);
  EXPECT_EQ(j.winner, Winner::kTie);
  EXPECT_EQ(judge->backend.call_count("eval.pairwise"), 2u);
}

TEST(Pairwise, ConsistentJudgePicksWinner) {
  StubScript script;
  // Prefers whichever slot holds the response mentioning "gloves".
  script.rules.push_back(rule("eval.pairwise", {{"winner", "first"}}, "Response 1:\nheated gloves"));
  script.rules.push_back(rule("eval.pairwise", {{"winner", "second"}}));
  auto judge = testing::make_stub_llm(script);
  auto j = judge_pairwise("p", "heated gloves", "a toaster", judge->llm);
  EXPECT_EQ(j.winner, Winner::kA);
  auto k = judge_pairwise("p", "a toaster", "heated gloves", judge->llm);
  EXPECT_EQ(k.winner, Winner::kB);
}

TEST(Pairwise, IdenticalResponsesSkipTheModel) {
  StubScript script;
  auto judge = testing::make_stub_llm(script);
  auto j = judge_pairwise("p", "same", "same", judge->llm);
  EXPECT_EQ(j.winner, Winner::kTie);
  EXPECT_TRUE(judge->backend.calls().empty());
}

TEST(Pairwise, WinnerNamesAndJson) {
  EXPECT_EQ(parse_winner("a"), Winner::kA);
  EXPECT_EQ(parse_winner("TIE"), Winner::kTie);
  EXPECT_THROW(parse_winner("first"), Error);
  PairwiseJudgment j{"j1", "p", "a", "b", Winner::kB, "why"};
  auto back = pairwise_judgment_from_json(to_json(j));
  EXPECT_EQ(back.winner, Winner::kB);
  EXPECT_EQ(back.response_b, "b");
}

TEST(EvalReport, Json) {
  std::vector<int> scores = {4, 2};
  auto judge = scripted_judge(scores);
  auto rubric = RubricRegistry::builtin().get("recommendation");
  EvalReport report{"run1", rubric.id(), judge_batch(items(2), rubric, judge->llm), std::nullopt};
  auto json = report.to_json();
  EXPECT_EQ(json["run_id"], "run1");
  EXPECT_EQ(json["means"]["candidate"]["display"], "3.00");
  EXPECT_EQ(json["per_item"]["candidate"].size(), 2u);
}

}  // namespace
}  // namespace commerce
