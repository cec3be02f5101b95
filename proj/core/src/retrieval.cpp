#include "commerce/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

bool result_before(const RetrievalResult& a, const RetrievalResult& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.product_id < b.product_id;
}

// Deliberately independent of satisfies()/filter_products so the two can be
// compared against each other.
bool reference_predicate(const Product& product, const FilterConstraints& c) {
  if (c.price_min && c.price_max && *c.price_min > *c.price_max) return false;
  if (c.in_stock_only && !product.in_stock) return false;
  if (c.price_min && !(product.price.amount >= *c.price_min)) return false;
  if (c.price_max && !(product.price.amount <= *c.price_max)) return false;
  if (c.category_prefix) {
    std::string prefix = text::normalize_category(*c.category_prefix);
    if (!prefix.empty()) {
      const std::string& category = product.category;
      bool match = category == prefix ||
                   (category.size() > prefix.size() && category.compare(0, prefix.size(), prefix) == 0 &&
                    category[prefix.size()] == '/');
      if (!match) return false;
    }
  }
  for (const auto& [name, value] : c.attribute_equals) {
    auto it = product.attributes.find(text::normalize_key(name));
    if (it == product.attributes.end() || it->second != text::normalize_key(value)) return false;
  }
  return true;
}

double reference_cosine(const Vector& a, const Vector& b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

nlohmann::json to_json(const RetrievalResult& result) {
  return {{"product_id", result.product_id},
          {"score", result.score},
          {"sources", result.sources},
          {"passed_hard_filter", result.passed_hard_filter}};
}

std::vector<RetrievalResult> merge_candidates(
    const std::vector<std::vector<ScoredId>>& per_hypothetical, std::size_t k_final) {
  std::map<std::string, RetrievalResult> merged;
  for (std::size_t h = 0; h < per_hypothetical.size(); ++h) {
    for (const auto& hit : per_hypothetical[h]) {
      auto [it, inserted] = merged.try_emplace(hit.id);
      RetrievalResult& r = it->second;
      if (inserted) {
        r.product_id = hit.id;
        r.score = hit.score;
      } else {
        r.score = std::max(r.score, hit.score);
      }
      if (std::find(r.sources.begin(), r.sources.end(), h) == r.sources.end()) r.sources.push_back(h);
    }
  }
  std::vector<RetrievalResult> out;
  out.reserve(merged.size());
  for (auto& [id, r] : merged) {
    std::sort(r.sources.begin(), r.sources.end());
    out.push_back(std::move(r));
  }
  std::sort(out.begin(), out.end(), result_before);
  if (out.size() > k_final) out.resize(k_final);
  return out;
}

std::vector<RetrievalResult> retrieve(const Stage1Output& stage1, const Catalog& catalog,
                                      const VectorIndex& index, const Embedder& embedder,
                                      const RetrievalOptions& options) {
  if (index.catalog_generation() != catalog.generation()) {
    throw Error(ErrorCode::kIndexMismatch, "vector index was built for another catalog generation",
                stage1.trace_id);
  }
  if (index.embedder_tag() != embedder.tag() || index.dimension() != embedder.dimension()) {
    throw Error(ErrorCode::kIndexMismatch,
                "vector index embedder '" + index.embedder_tag() + "' does not match '" +
                    embedder.tag() + "'",
                stage1.trace_id);
  }

  auto allowed_ids = filter_products(catalog, stage1.structured_query.hard_constraints);
  if (allowed_ids.empty()) return {};
  std::unordered_set<std::string> allow(allowed_ids.begin(), allowed_ids.end());

  std::vector<std::vector<ScoredId>> per_hypothetical;
  per_hypothetical.reserve(stage1.hypotheticals.size());
  for (const auto& hypothetical : stage1.hypotheticals) {
    per_hypothetical.push_back(
        knn(index, embedder.embed(hypothetical.query_text()), options.k_per_hypothetical, &allow));
  }
  return merge_candidates(per_hypothetical, options.k_final);
}

std::vector<RetrievalResult> brute_force_retrieve(const Stage1Output& stage1,
                                                  const Catalog& catalog,
                                                  const Embedder& embedder,
                                                  const RetrievalOptions& options) {
  std::vector<std::pair<std::string, Vector>> products;
  for (const auto& [id, product] : catalog.products()) {
    if (reference_predicate(product, stage1.structured_query.hard_constraints)) {
      products.emplace_back(id, embedder.embed(indexed_text(product)));
    }
  }
  std::vector<std::vector<ScoredId>> per_hypothetical;
  for (const auto& hypothetical : stage1.hypotheticals) {
    Vector query = embedder.embed(hypothetical.query_text());
    std::vector<ScoredId> scored;
    for (const auto& [id, vector] : products) scored.push_back({id, reference_cosine(query, vector)});
    std::sort(scored.begin(), scored.end(), [](const ScoredId& a, const ScoredId& b) {
      return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    if (scored.size() > options.k_per_hypothetical) scored.resize(options.k_per_hypothetical);
    per_hypothetical.push_back(std::move(scored));
  }
  return merge_candidates(per_hypothetical, options.k_final);
}

}  // namespace commerce
