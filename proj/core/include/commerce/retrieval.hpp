#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/catalog.hpp"
#include "commerce/embeddings.hpp"
#include "commerce/query_pipeline.hpp"

namespace commerce {

struct RetrievalResult {
  std::string product_id;
  double score = 0.0;                 // best cosine across hypotheticals
  std::vector<std::size_t> sources;   // hypothetical indices that surfaced the product
  bool passed_hard_filter = true;

  bool operator==(const RetrievalResult&) const = default;
};

nlohmann::json to_json(const RetrievalResult& result);

struct RetrievalOptions {
  std::size_t k_per_hypothetical = 10;
  std::size_t k_final = 20;
};

// Keeps the best score per product and the union of sources, ordered by
// (score desc, product_id asc) and truncated to k_final.
std::vector<RetrievalResult> merge_candidates(
    const std::vector<std::vector<ScoredId>>& per_hypothetical, std::size_t k_final);

// Hard constraints first, then k-NN per hypothetical over the surviving ids. An
// unsatisfiable filter yields an empty list. Throws Error(kIndexMismatch) when the
// index was built for another catalog generation or embedder.
std::vector<RetrievalResult> retrieve(const Stage1Output& stage1, const Catalog& catalog,
                                      const VectorIndex& index, const Embedder& embedder,
                                      const RetrievalOptions& options = {});

// Reference implementation: re-embeds every product and scans the whole catalog.
// Used to cross-check retrieve().
std::vector<RetrievalResult> brute_force_retrieve(const Stage1Output& stage1,
                                                  const Catalog& catalog,
                                                  const Embedder& embedder,
                                                  const RetrievalOptions& options = {});

}  // namespace commerce
