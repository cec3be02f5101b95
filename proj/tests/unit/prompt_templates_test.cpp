#include <gtest/gtest.h>

#include <fstream>

#include "commerce/errors.hpp"
#include "commerce/prompt_templates.hpp"
#include "commerce/stub_backend.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

TEST(TemplateStore, BuiltinsPresentWithSchemas) {
  auto store = TemplateStore::builtin();
  for (const char* id : {"stage1.attrs", "stage1.formulate", "stage1.hyde", "rank.rerank",
                         "eval.quality", "eval.pairwise", "agent.intent"}) {
    ASSERT_TRUE(store.contains(id)) << id;
    EXPECT_TRUE(store.get(id).schema.has_value()) << id;
    EXPECT_EQ(store.get(id).version.size(), 12u) << id;
  }
  EXPECT_TRUE(store.contains("profile.summary"));
  EXPECT_FALSE(store.get("profile.summary").schema.has_value());
  try {
    store.get("nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
  }
}

TEST(TemplateStore, SubstituteLeavesUnknownBraces) {
  EXPECT_EQ(TemplateStore::substitute("{a} and {b} and {\"json\": 1}", {{"a", "x"}}),
            "x and {b} and {\"json\": 1}");
  EXPECT_EQ(TemplateStore::substitute("{a}{a}", {{"a", "{a}"}}), "{a}{a}");
}

TEST(TemplateStore, ParseSectionsAndVersion) {
  auto t = TemplateStore::parse("x", "# comment\n[system]\nS\n[user]\nU {q}\n", std::nullopt);
  EXPECT_EQ(t.system, "S");
  EXPECT_EQ(t.user, "U {q}");
  auto t2 = TemplateStore::parse("x", "[system]\nS2\n[user]\nU {q}\n", std::nullopt);
  EXPECT_NE(t.version, t2.version);
  EXPECT_THROW(TemplateStore::parse("x", "[system]\nonly\n", std::nullopt), Error);
  EXPECT_THROW(TemplateStore::parse("x", "[user]\nu\n", std::string("{bad")), Error);
}

TEST(TemplateStore, LoadDirectoryOverrides) {
  testing::TempDir dir;
  std::ofstream(dir / "stage1.attrs.txt") << "[system]\nCustom\n[user]\n{query}\n";
  std::ofstream(dir / "stage1.attrs.schema.json") << R"({"type": "array"})";
  auto store = TemplateStore::builtin();
  store.load_directory(dir.path().string());
  EXPECT_EQ(store.get("stage1.attrs").system, "Custom");
  EXPECT_THROW(store.load_directory((dir / "missing").string()), Error);
}

TEST(RenderCall, BuildsRequest) {
  StubBackend backend(StubScript{});
  auto store = TemplateStore::builtin();
  LlmContext llm{backend, store, "base", {{"stage1.hyde", "big"}}};
  std::vector<ChatMessage> history = {{Role::kUser, "earlier"}, {Role::kAssistant, "reply"}};
  auto call = render_call(llm, "stage1.attrs", {{"query", "red shoes"}}, history);
  EXPECT_EQ(call.request.template_id, "stage1.attrs");
  EXPECT_EQ(call.request.model_tag, "base");
  EXPECT_TRUE(call.request.response_schema.has_value());
  ASSERT_EQ(call.request.messages.size(), 4u);
  EXPECT_EQ(call.request.messages[0].role, Role::kSystem);
  EXPECT_EQ(call.request.messages[1].content, "earlier");
  EXPECT_EQ(call.request.messages.back().content, call.user_prompt);
  EXPECT_NE(call.user_prompt.find("red shoes"), std::string::npos);
  EXPECT_EQ(llm.model_for("stage1.hyde"), "big");
}

}  // namespace
}  // namespace commerce
