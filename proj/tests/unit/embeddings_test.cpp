#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "commerce/embeddings.hpp"
#include "commerce/errors.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

double norm(const Vector& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

TEST(Tokenize, UnigramsThenBigrams) {
  EXPECT_EQ(HashingEmbedder::tokenize("Power bank, 10000mAh"),
            (std::vector<std::string>{"power", "bank", "10000mah", "power bank", "bank 10000mah"}));
  EXPECT_TRUE(HashingEmbedder::tokenize(" ,;! ").empty());
}

TEST(EmbedText, EmptyIsZero) {
  auto v = embed_text("");
  ASSERT_EQ(v.size(), 256u);
  EXPECT_EQ(norm(v), 0.0);
}

TEST(EmbedText, Deterministic) {
  EXPECT_EQ(embed_text("Heated gloves for skiing"), embed_text("Heated gloves for skiing"));
}

// Frozen values from the independent Python reimplementation of the hashing recipe.
TEST(EmbedText, MatchesFrozenOracle) {
  auto probes = testing::read_json(testing::data_path("oracles/frozen/embeddings.json"));
  ASSERT_FALSE(probes.empty());
  for (const auto& probe : probes) {
    auto text = probe["text"].get<std::string>();
    auto v = embed_text(text);
    ASSERT_EQ(v.size(), probe["dim"].get<std::size_t>());
    EXPECT_EQ(HashingEmbedder::tokenize(text).size(), probe["tokens"].get<std::size_t>()) << text;
    for (std::size_t i = 0; i < v.size(); ++i) {
      auto key = std::to_string(i);
      double expected = probe["nonzero"].contains(key) ? probe["nonzero"][key].get<double>() : 0.0;
      EXPECT_NEAR(v[i], expected, 1e-12) << text << " bucket " << i;
    }
    if (!text.empty()) {
      EXPECT_NEAR(norm(v), 1.0, 1e-6);
    }
  }
}

TEST(Cosine, Identities) {
  auto v = embed_text("USB-C power bank");
  Vector neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-9);
  EXPECT_NEAR(cosine_similarity(v, neg), -1.0, 1e-9);
  Vector e1(4, 0.0), e2(4, 0.0);
  e1[0] = 1;
  e2[1] = 1;
  EXPECT_EQ(cosine_similarity(e1, e2), 0.0);
  EXPECT_EQ(cosine_similarity(Vector(4, 0.0), e1), 0.0);
  try {
    cosine_similarity(e1, v);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(IndexedText, FieldOrder) {
  Product p;
  p.title = "Vertex II";
  p.category = "apparel/gloves/heated";
  p.description = "warm";
  p.attributes = {{"size", "m"}, {"color", "black"}};
  EXPECT_EQ(indexed_text(p), "Vertex II apparel gloves heated warm black m");
}

TEST(VectorIndex, BuildFixture) {
  auto catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  EXPECT_EQ(index.size(), 500u);
  for (const auto& entry : index.entries()) EXPECT_EQ(entry.vector.size(), 256u);
  EXPECT_EQ(index.serialize(), build_vector_index(*catalog, embedder).serialize());
  EXPECT_EQ(build_vector_index(*Catalog::from_products({}), embedder).size(), 0u);
}

TEST(VectorIndex, PersistenceRoundTripAndTagCheck) {
  auto catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  testing::TempDir dir;
  auto path = (dir / "index.json").string();
  save_vector_index(index, path);
  auto loaded = load_vector_index(path, *catalog, embedder);
  EXPECT_EQ(loaded.serialize(), index.serialize());

  HashingEmbedder other(128);
  try {
    load_vector_index(path, *catalog, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIndexMismatch);
  }
}

TEST(Knn, SelfRetrieval) {
  auto catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  const auto& product = catalog->products().at("p0123");
  auto hits = knn(index, embedder.embed(indexed_text(product)), 3);
  ASSERT_FALSE(hits.empty());
  EXPECT_EQ(hits[0].id, "p0123");
  EXPECT_NEAR(hits[0].score, 1.0, 1e-6);
}

TEST(Knn, ZeroKAndAllowSet) {
  auto catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  auto q = embedder.embed("power bank");
  EXPECT_TRUE(knn(index, q, 0).empty());
  std::unordered_set<std::string> allow = {"p0001", "p0002", "p0003"};
  auto hits = knn(index, q, 100, &allow);
  EXPECT_EQ(hits.size(), 3u);
  for (const auto& h : hits) EXPECT_TRUE(allow.contains(h.id));
}

// Random queries against a full-scan sort; every k is a prefix of the full ranking.
TEST(Knn, MatchesBruteForceOracle) {
  auto catalog = testing::fixture_catalog();
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss;
  for (int round = 0; round < 20; ++round) {
    Vector q(256);
    for (auto& x : q) x = gauss(rng);
    std::vector<ScoredId> full;
    for (const auto& entry : index.entries()) full.push_back({entry.id, cosine_similarity(q, entry.vector)});
    std::sort(full.begin(), full.end(), ranks_before);
    for (std::size_t k : {1u, 7u, 50u, 500u, 900u}) {
      auto hits = knn(index, q, k);
      ASSERT_EQ(hits.size(), std::min<std::size_t>(k, full.size()));
      for (std::size_t i = 0; i < hits.size(); ++i) ASSERT_EQ(hits[i], full[i]);
    }
  }
}

TEST(Knn, TiesBrokenById) {
  std::vector<VectorIndex::Entry> entries = {{"b", {1, 0}}, {"a", {1, 0}}, {"c", {0, 1}}};
  VectorIndex index(2, "t", 0, entries);
  auto hits = knn(index, {1, 0}, 3);
  ASSERT_EQ(hits.size(), 3u);
  EXPECT_EQ(hits[0].id, "a");
  EXPECT_EQ(hits[1].id, "b");
  EXPECT_EQ(hits[2].id, "c");
}

}  // namespace
}  // namespace commerce
