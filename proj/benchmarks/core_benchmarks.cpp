#include <benchmark/benchmark.h>

#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commerce/catalog.hpp"
#include "commerce/embeddings.hpp"
#include "commerce/json_schema.hpp"
#include "commerce/retrieval.hpp"

namespace commerce {
namespace {

const std::vector<std::string> kCategories = {"electronics/power-banks", "apparel/gloves/heated",
                                              "electronics/cameras/action", "shoes/running",
                                              "home/kitchen", "sports/ski"};
const std::vector<std::string> kBrands = {"Anker", "Veho", "GoPro", "Salomon", "Hario", "Bose"};
const std::vector<std::string> kColors = {"black", "blue", "red", "white"};

// Synthetic catalog of `n` products, identical for a given n.
CatalogHandle synthetic_catalog(std::size_t n) {
  std::mt19937_64 rng(n);
  std::ostringstream lines;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& category = kCategories[rng() % kCategories.size()];
    const auto& brand = kBrands[rng() % kBrands.size()];
    std::string leaf = category.substr(category.rfind('/') + 1);
    nlohmann::json record = {{"id", "b" + std::to_string(i)},
                             {"title", brand + " " + leaf + " " + std::to_string(i % 97)},
                             {"description", "A " + leaf + " by " + brand + " for everyday use."},
                             {"category", category},
                             {"brand", brand},
                             {"price", 5.0 + static_cast<double>(rng() % 30000) / 100.0},
                             {"currency", "USD"},
                             {"attributes", {{"color", kColors[rng() % kColors.size()]}}},
                             {"in_stock", rng() % 5 != 0}};
    lines << record.dump() << '\n';
  }
  std::istringstream in(lines.str());
  return ingest_catalog(in).catalog;
}

Stage1Output ski_stage1() {
  Stage1Output out;
  out.query = "Suggest tech accessories for skiing";
  out.hypotheticals = {{"Heated Tech Gloves", "Vertex II", "heated gloves", ""},
                       {"Power Banks", "Veho 10,000mAh", "USB-C power bank", ""},
                       {"Action Cameras", "GoPro MAX 360", "360 cameras", ""},
                       {"Phone Cases", "Mount Ready Case", "protective case", ""}};
  return out;
}

void BM_EmbedText(benchmark::State& state) {
  std::string text = "Anker Flex Heated Tech Gloves touchscreen compatible with USB-C charging";
  for (auto _ : state) benchmark::DoNotOptimize(embed_text(text));
}
BENCHMARK(BM_EmbedText);

void BM_Knn(benchmark::State& state) {
  auto catalog = synthetic_catalog(static_cast<std::size_t>(state.range(0)));
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  auto query = embed_text("heated gloves for cold weather");
  for (auto _ : state) benchmark::DoNotOptimize(knn(index, query, 10));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Knn)->RangeMultiplier(4)->Range(500, 32000)->Complexity(benchmark::oN);

void BM_FilterProducts(benchmark::State& state) {
  auto catalog = synthetic_catalog(static_cast<std::size_t>(state.range(0)));
  FilterConstraints constraints;
  constraints.category_prefix = "electronics";
  constraints.price_max = 100.0;
  for (auto _ : state) benchmark::DoNotOptimize(filter_products(*catalog, constraints));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FilterProducts)->RangeMultiplier(4)->Range(500, 32000)->Complexity(benchmark::oN);

void BM_Retrieve(benchmark::State& state) {
  auto catalog = synthetic_catalog(static_cast<std::size_t>(state.range(0)));
  HashingEmbedder embedder;
  auto index = build_vector_index(*catalog, embedder);
  auto stage1 = ski_stage1();
  for (auto _ : state) benchmark::DoNotOptimize(retrieve(stage1, *catalog, index, embedder));
}
BENCHMARK(BM_Retrieve)->Arg(500)->Arg(5000)->Arg(20000);

void BM_ValidateAndRepairJson(benchmark::State& state) {
  auto schema = nlohmann::json::parse(R"({"type": "array", "items": {"type": "object",
      "properties": {"category": {"type": "string"}, "specific_item": {"type": "string"}},
      "required": ["category"]}})");
  std::string strict = R"([{"category": "Power Banks", "specific_item": "Veho"},
                           {"category": "Phone Cases", "specific_item": "Mount Ready Case"}])";
  std::string wrapped = "Sure! Here are some ideas:\n```json\n" + strict + "\n```\nEnjoy the slopes.";
  const std::string& raw = state.range(0) ? wrapped : strict;
  for (auto _ : state) benchmark::DoNotOptimize(validate_and_repair_json(raw, schema));
  state.SetLabel(state.range(0) ? "extracted" : "strict");
}
BENCHMARK(BM_ValidateAndRepairJson)->Arg(0)->Arg(1);

}  // namespace
}  // namespace commerce

BENCHMARK_MAIN();
