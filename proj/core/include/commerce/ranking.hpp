#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/catalog.hpp"
#include "commerce/personalization.hpp"
#include "commerce/prompt_templates.hpp"
#include "commerce/retrieval.hpp"

namespace commerce {

struct RankWeights {
  double alpha = 0.7;  // retrieval similarity
  double beta = 0.3;   // profile affinity

  // Throws Error(kInvalidArgument) unless both are in [0,1] and sum to 1.
  void validate() const;
};

struct RankedItem {
  std::string product_id;
  double fused = 0.0;
  double retrieval = 0.0;  // clamped to [0,1]
  double affinity = 0.0;
  std::size_t rank = 0;    // 1-based
  std::string explanation;
};

nlohmann::json to_json(const RankedItem& item);

struct RankedList {
  std::vector<RankedItem> items;
  bool degraded = false;           // re-ranking was requested but could not be applied
  std::vector<std::string> notes;  // dropped ids and similar remarks
};

nlohmann::json to_json(const RankedList& list);

// fused = alpha * clamp(score, 0, 1) + beta * affinity, ordered by (fused desc,
// retrieval desc, product_id asc) and cut to k. Every id must resolve in `catalog`;
// otherwise throws Error(kGrounding).
RankedList rank_top_k(const std::vector<RetrievalResult>& candidates, const UserProfile* profile,
                      const Catalog& catalog, std::size_t k, const RankWeights& weights = {});

// Optional model re-ranking. The model may only reorder the given ids: unknown ids are
// dropped with a note, omitted ids keep their relative order after the echoed ones.
// On any model failure the input order is returned with degraded = true.
RankedList llm_rerank(const RankedList& ranked, const UserProfile* profile, const Catalog& catalog,
                      const LlmContext& llm, std::string_view query, const std::string& trace_id = {});

}  // namespace commerce
