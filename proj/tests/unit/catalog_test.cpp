#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "commerce/catalog.hpp"
#include "commerce/errors.hpp"
#include "test_support.hpp"

namespace commerce {
namespace {

using testing::fixture_catalog;

nlohmann::json base_record(const std::string& id = "p1") {
  return {{"id", id},
          {"title", "Trail Runner"},
          {"description", "light"},
          {"category", "Shoes / Running"},
          {"brand", " Acme "},
          {"price", 89.5},
          {"currency", "usd"},
          {"attributes", {{" Arch  Support ", " HIGH "}}},
          {"in_stock", true}};
}

IngestResult ingest_lines(const std::vector<std::string>& lines, IngestOptions options = {}) {
  std::stringstream in;
  for (const auto& line : lines) in << line << "\n";
  return ingest_catalog(in, options);
}

TEST(Ingest, EmptySource) {
  auto result = ingest_lines({});
  EXPECT_EQ(result.catalog->size(), 0u);
  EXPECT_EQ(result.report.accepted, 0u);
  EXPECT_TRUE(result.report.rejected.empty());
}

TEST(Ingest, NormalizesRecord) {
  auto product = parse_product_record(base_record());
  EXPECT_EQ(product.category, "shoes/running");
  EXPECT_EQ(product.brand, "Acme");
  EXPECT_EQ(product.price.currency, "USD");
  EXPECT_EQ(product.attributes.at("arch support"), "high");
}

TEST(Ingest, NegativePriceRejected) {
  auto bad = base_record("p2");
  bad["price"] = "-5.00";
  auto result = ingest_lines({base_record().dump(), bad.dump()});
  EXPECT_EQ(result.report.accepted, 1u);
  ASSERT_EQ(result.report.rejected.size(), 1u);
  EXPECT_EQ(result.report.rejected[0], (IngestRejection{2, "negative price"}));
}

TEST(Ingest, RejectionsKeepPhysicalLineNumbers) {
  auto unknown = base_record("p3");
  unknown["color"] = "red";
  auto no_category = base_record("p4");
  no_category["category"] = " / ";
  auto result = ingest_lines(
      {base_record().dump(), "", "{not json", base_record().dump(), unknown.dump(), no_category.dump()});
  EXPECT_EQ(result.report.accepted, 1u);
  ASSERT_EQ(result.report.rejected.size(), 4u);
  EXPECT_EQ(result.report.rejected[0], (IngestRejection{3, "invalid json"}));
  EXPECT_EQ(result.report.rejected[1], (IngestRejection{4, "duplicate id 'p1'"}));
  EXPECT_EQ(result.report.rejected[2], (IngestRejection{5, "unknown key 'color'"}));
  EXPECT_EQ(result.report.rejected[3], (IngestRejection{6, "empty category"}));
}

TEST(Ingest, UnknownKeysIgnoredOnRequest) {
  auto unknown = base_record();
  unknown["color"] = "red";
  auto result = ingest_lines({unknown.dump()}, {.ignore_unknown_keys = true});
  EXPECT_EQ(result.report.accepted, 1u);
}

TEST(Ingest, MissingFileIsIoError) {
  try {
    ingest_catalog_file("/nonexistent/catalog.jsonl");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Ingest, FixtureMatchesLineCountOracle) {
  auto oracle = testing::read_json(testing::data_path("oracles/frozen/catalog.json"));
  auto result = ingest_catalog_file(testing::data_path("fixtures/catalog_500.jsonl").string());
  EXPECT_EQ(result.report.accepted, oracle["lines"].get<std::size_t>());
  EXPECT_TRUE(result.report.rejected.empty());
  EXPECT_EQ(result.catalog->size(), oracle["distinct_ids"].get<std::size_t>());
}

TEST(Ingest, DeterministicContents) {
  auto a = ingest_catalog_file(testing::data_path("fixtures/catalog_500.jsonl").string());
  auto b = ingest_catalog_file(testing::data_path("fixtures/catalog_500.jsonl").string());
  EXPECT_EQ(a.catalog->products(), b.catalog->products());
  EXPECT_LT(a.catalog->generation(), b.catalog->generation());
}

TEST(Lookup, CaseSensitive) {
  auto catalog = fixture_catalog();
  ASSERT_TRUE(lookup(*catalog, "p0000").has_value());
  EXPECT_EQ(lookup(*catalog, "p0000")->id, "p0000");
  EXPECT_FALSE(lookup(*catalog, "P0000").has_value());
  EXPECT_FALSE(lookup(*catalog, "missing").has_value());
}

TEST(Filter, EmptyConstraintsReturnEverything) {
  auto catalog = fixture_catalog();
  FilterConstraints none;
  none.in_stock_only = false;
  EXPECT_EQ(filter_products(*catalog, none), catalog->all_ids());
}

TEST(Filter, CategoryPrefixMatchesOracle) {
  auto oracle = testing::read_json(testing::data_path("oracles/frozen/catalog.json"));
  auto catalog = fixture_catalog();
  FilterConstraints c;
  c.category_prefix = "electronics/power-banks";
  EXPECT_EQ(filter_products(*catalog, c), oracle["power_banks_in_stock"].get<std::vector<std::string>>());
  c.in_stock_only = false;
  EXPECT_EQ(filter_products(*catalog, c), oracle["power_banks_all"].get<std::vector<std::string>>());
}

TEST(Filter, RunningShoesUnder100) {
  auto oracle = testing::read_json(testing::data_path("oracles/frozen/catalog.json"));
  auto catalog = fixture_catalog();
  FilterConstraints c;
  c.category_prefix = "shoes/running";
  c.price_max = 100;
  auto ids = filter_products(*catalog, c);
  EXPECT_EQ(ids, oracle["running_shoes_max_100_in_stock"].get<std::vector<std::string>>());
  for (const auto& id : ids) EXPECT_LE(catalog->find(id)->price.amount, 100.0);
}

TEST(Filter, SegmentPrefixOnly) {
  auto catalog = fixture_catalog();
  FilterConstraints c;
  c.category_prefix = "electronics/power";
  EXPECT_TRUE(filter_products(*catalog, c).empty());
}

TEST(Filter, UnsatisfiableIsEmpty) {
  auto catalog = fixture_catalog();
  FilterConstraints c;
  c.price_min = 50;
  c.price_max = 10;
  EXPECT_TRUE(filter_products(*catalog, c).empty());
  EXPECT_THROW(c.validate(), Error);
}

// Randomized constraints against the linear-scan predicate, plus monotone narrowing.
TEST(Filter, OracleEquivalenceAndNarrowing) {
  auto catalog = fixture_catalog();
  std::mt19937_64 rng(7);
  std::vector<std::string> prefixes = {"electronics", "apparel/gloves", "shoes/running",
                                       "sports/ski", "home/kitchen", "nope"};
  std::vector<std::pair<std::string, std::string>> attrs = {
      {"color", "blue"}, {"port", "usb-c"}, {"waterproof", "yes"}, {"capacity", "10000mah"}};
  for (int round = 0; round < 300; ++round) {
    FilterConstraints c;
    c.in_stock_only = rng() % 2;
    if (rng() % 2) c.category_prefix = prefixes[rng() % prefixes.size()];
    if (rng() % 3 == 0) c.attribute_equals.push_back(attrs[rng() % attrs.size()]);
    if (rng() % 2) c.price_max = static_cast<double>(rng() % 300);
    if (rng() % 3 == 0) c.price_min = static_cast<double>(rng() % 100);

    std::vector<std::string> expected;
    for (const auto& [id, product] : catalog->products()) {
      if (satisfies(product, c)) expected.push_back(id);
    }
    auto got = filter_products(*catalog, c);
    ASSERT_EQ(got, expected) << to_json(c).dump();

    FilterConstraints tighter = c;
    tighter.in_stock_only = true;
    tighter.price_max = c.price_max ? std::min(*c.price_max, 120.0) : 120.0;
    auto narrowed = filter_products(*catalog, tighter);
    std::set<std::string> base(got.begin(), got.end());
    for (const auto& id : narrowed) ASSERT_TRUE(base.contains(id));
  }
}

TEST(Constraints, JsonRoundTrip) {
  FilterConstraints c;
  c.category_prefix = "shoes";
  c.attribute_equals = {{"color", "blue"}};
  c.price_max = 100;
  c.in_stock_only = false;
  EXPECT_EQ(filter_constraints_from_json(to_json(c)), c);
}

TEST(Constraints, MergeNewestWins) {
  FilterConstraints older;
  older.price_max = 100;
  older.attribute_equals = {{"color", "blue"}, {"size", "10"}};
  FilterConstraints newer;
  newer.price_min = 150;
  newer.attribute_equals = {{"color", "red"}};
  auto merged = merge_newest_wins(older, newer);
  EXPECT_EQ(merged.price_min, 150.0);
  EXPECT_FALSE(merged.price_max.has_value());
  EXPECT_EQ(merged.attribute_equals,
            (std::vector<std::pair<std::string, std::string>>{{"size", "10"}, {"color", "red"}}));
}

}  // namespace
}  // namespace commerce
