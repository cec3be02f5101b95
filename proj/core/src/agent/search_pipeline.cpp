#include "commerce/agent/search_pipeline.hpp"

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce::agent {

void SearchOutcome::rethrow() const {
  if (run.failure) std::rethrow_exception(run.failure);
}

nlohmann::json product_cards(const RankedList& ranked, const Catalog& catalog) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& item : ranked.items) {
    const Product* p = catalog.find(item.product_id);
    if (!p) continue;
    out.push_back({{"id", p->id},
                   {"title", p->title},
                   {"price", p->price.amount},
                   {"currency", p->price.currency},
                   {"category", p->category},
                   {"score", item.fused},
                   {"explanation", item.explanation}});
  }
  return out;
}

nlohmann::json SearchOutcome::to_json(const Catalog& catalog) const {
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& t : run.timings) {
    timings.push_back({{"stage", stage_name(t.stage)}, {"ms", t.seconds * 1000.0}});
  }
  return {{"trace_id", run.trace_id},
          {"query", stage1.query},
          {"structured_query", commerce::to_json(stage1.structured_query)},
          {"hypotheticals", hypotheticals_to_json(stage1.hypotheticals)},
          {"applied_constraints", commerce::to_json(applied)},
          {"products", product_cards(ranked, catalog)},
          {"timings", timings},
          {"degraded", ranked.degraded},
          {"notes", ranked.notes}};
}

SearchOutcome run_search(const SearchRequest& request, const SearchDeps& deps, const Clock& clock) {
  SearchOutcome out;
  std::string trace_id = request.trace_id.empty() ? "t-" + text::random_token().substr(0, 16)
                                                  : request.trace_id;
  Stage1Context context{request.profile, request.history, trace_id};

  std::vector<StageStep> steps = {
      {Stage::kStage1Formulation,
       [&] {
         out.stage1 = run_stage1(request.query, deps.llm, context);
         out.applied = merge_newest_wins(request.memory, out.stage1.structured_query.hard_constraints);
         out.stage1.structured_query.hard_constraints = out.applied;
       }},
      {Stage::kRetrieval,
       [&] {
         out.retrieved = retrieve(out.stage1, deps.catalog, deps.index, deps.embedder, deps.retrieval);
       }},
      {Stage::kRanking,
       [&] {
         out.ranked = rank_top_k(out.retrieved, request.profile, deps.catalog, deps.k, deps.weights);
         if (deps.llm_rerank) {
           out.ranked = llm_rerank(out.ranked, request.profile, deps.catalog, deps.llm,
                                   request.query, trace_id);
         }
       }},
  };
  out.run = instrument_run(steps, trace_id, clock);
  return out;
}

}  // namespace commerce::agent
