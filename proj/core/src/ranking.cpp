#include "commerce/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "commerce/errors.hpp"
#include "commerce/llm_gateway.hpp"

namespace commerce {

void RankWeights::validate() const {
  bool in_range = alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0;
  if (!in_range || std::abs(alpha + beta - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, "rank weights must lie in [0,1] and sum to 1");
  }
}

nlohmann::json to_json(const RankedItem& item) {
  nlohmann::json out = {{"product_id", item.product_id},
                        {"rank", item.rank},
                        {"fused", item.fused},
                        {"retrieval", item.retrieval},
                        {"affinity", item.affinity}};
  if (!item.explanation.empty()) out["explanation"] = item.explanation;
  return out;
}

nlohmann::json to_json(const RankedList& list) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : list.items) items.push_back(to_json(item));
  return {{"items", items}, {"degraded", list.degraded}, {"notes", list.notes}};
}

RankedList rank_top_k(const std::vector<RetrievalResult>& candidates, const UserProfile* profile,
                      const Catalog& catalog, std::size_t k, const RankWeights& weights) {
  weights.validate();
  RankedList out;
  for (const auto& candidate : candidates) {
    const Product* product = catalog.find(candidate.product_id);
    if (!product) {
      throw Error(ErrorCode::kGrounding,
                  "candidate '" + candidate.product_id + "' is not in the catalog");
    }
    RankedItem item;
    item.product_id = candidate.product_id;
    item.retrieval = std::clamp(candidate.score, 0.0, 1.0);
    item.affinity = affinity(profile, *product);
    item.fused = weights.alpha * item.retrieval + weights.beta * item.affinity;
    out.items.push_back(std::move(item));
  }
  std::sort(out.items.begin(), out.items.end(), [](const RankedItem& a, const RankedItem& b) {
    if (a.fused != b.fused) return a.fused > b.fused;
    if (a.retrieval != b.retrieval) return a.retrieval > b.retrieval;
    return a.product_id < b.product_id;
  });
  if (out.items.size() > k) out.items.resize(k);
  for (std::size_t i = 0; i < out.items.size(); ++i) out.items[i].rank = i + 1;
  return out;
}

RankedList llm_rerank(const RankedList& ranked, const UserProfile* profile, const Catalog& catalog,
                      const LlmContext& llm, std::string_view query, const std::string& trace_id) {
  if (ranked.items.size() < 2) return ranked;

  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& item : ranked.items) {
    const Product* product = catalog.find(item.product_id);
    candidates.push_back({{"product_id", item.product_id},
                          {"title", product ? product->title : std::string{}},
                          {"category", product ? product->category : std::string{}},
                          {"price", product ? product->price.amount : 0.0}});
  }

  nlohmann::json order;
  try {
    auto call = render_call(llm, "rank.rerank",
                            {{"query", std::string(query)},
                             {"profile", profile_prompt_text(profile)},
                             {"candidates", candidates.dump()}});
    auto response = complete_chat(llm.backend, call.request);
    order = response.parsed.value_or(nlohmann::json::array());
  } catch (const Error& e) {
    RankedList out = ranked;
    out.degraded = true;
    out.notes.push_back(std::string("rerank skipped: ") + std::string(error_code_name(e.code())) +
                        (trace_id.empty() ? "" : " (" + trace_id + ")"));
    return out;
  }

  RankedList out;
  out.notes = ranked.notes;
  std::set<std::string> placed;
  for (const auto& entry : order) {
    std::string id = entry.value("product_id", std::string{});
    auto it = std::find_if(ranked.items.begin(), ranked.items.end(),
                           [&](const RankedItem& item) { return item.product_id == id; });
    if (it == ranked.items.end()) {
      out.notes.push_back("rerank dropped unknown id '" + id + "'");
      continue;
    }
    if (!placed.insert(id).second) continue;
    RankedItem item = *it;
    item.explanation = entry.value("explanation", std::string{});
    out.items.push_back(std::move(item));
  }
  for (const auto& item : ranked.items) {
    if (!placed.count(item.product_id)) out.items.push_back(item);
  }
  for (std::size_t i = 0; i < out.items.size(); ++i) out.items[i].rank = i + 1;
  return out;
}

}  // namespace commerce
