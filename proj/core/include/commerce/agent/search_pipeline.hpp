#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/bench.hpp"
#include "commerce/catalog.hpp"
#include "commerce/embeddings.hpp"
#include "commerce/query_pipeline.hpp"
#include "commerce/ranking.hpp"
#include "commerce/retrieval.hpp"

namespace commerce::agent {

struct SearchDeps {
  const Catalog& catalog;
  const VectorIndex& index;
  const Embedder& embedder;
  const LlmContext& llm;
  RetrievalOptions retrieval = {};
  RankWeights weights = {};
  std::size_t k = 10;
  bool llm_rerank = false;
};

struct SearchRequest {
  std::string query;
  const UserProfile* profile = nullptr;
  // Constraints remembered from earlier turns; this query's own constraints win
  // field by field.
  FilterConstraints memory;
  std::vector<ChatMessage> history;
  std::string trace_id;
};

struct SearchOutcome {
  Stage1Output stage1;
  FilterConstraints applied;  // constraints retrieval actually used
  std::vector<RetrievalResult> retrieved;
  RankedList ranked;
  InstrumentedRun run;  // per-stage timings; partial when a stage threw

  bool ok() const { return !run.partial; }
  // Rethrows the failing stage's exception.
  void rethrow() const;
  nlohmann::json to_json(const Catalog& catalog) const;
};

// stage 1 -> retrieval -> ranking (+ optional model re-rank), each stage timed.
// Never throws for stage failures; inspect ok() / run.
SearchOutcome run_search(const SearchRequest& request, const SearchDeps& deps,
                         const Clock& clock = steady_clock());

// {id, title, price, currency, score, explanation} per ranked item.
nlohmann::json product_cards(const RankedList& ranked, const Catalog& catalog);

}  // namespace commerce::agent
