#pragma once

#include <optional>
#include <string>
#include <vector>

#include "commerce/agent/inventory.hpp"
#include "commerce/agent/search_pipeline.hpp"
#include "commerce/agent/session.hpp"
#include "commerce/prompt_templates.hpp"

namespace commerce::agent {

struct OrchestratorOptions {
  std::size_t results_k = 10;
  RetrievalOptions retrieval;
  RankWeights weights;
  bool llm_rerank = false;
  std::size_t memory_window = 6;
};

struct IntentDecision {
  Intent intent = Intent::kSearch;
  bool reset = false;     // drop remembered constraints before this turn
  bool degraded = false;  // fell back to search
  std::string note;
};

// Resolves "the second one", "#3", "last", or a product id against `shown`. A
// product id elsewhere in the catalog resolves too when `catalog` is given.
std::optional<std::string> resolve_product_reference(const std::string& reference,
                                                     const std::vector<RankedItem>* shown,
                                                     const Catalog* catalog = nullptr);

struct CartResult {
  std::string product_id;
  bool duplicate = false;
  std::vector<std::string> cart;
};

class Orchestrator {
 public:
  Orchestrator(Inventory& inventory, ProfileStore& profiles, SessionStore& sessions,
               const LlmContext& llm, OrchestratorOptions options = {});

  IntentDecision classify_intent(const std::string& message,
                                 const std::vector<ChatMessage>& window) const;

  // Appends the user turn and the agent's reply to the session and returns the
  // reply. Throws Error(kNotFound) for an unknown session and
  // Error(kInvalidArgument) for an empty message; any other failure becomes an
  // apology turn carrying the error code.
  ChatTurn handle_turn(const std::string& session_id, const std::string& message);

  // Adds a referenced product to the cart (no duplicates). Throws Error(kNotFound)
  // for an unknown session or a reference that resolves to nothing.
  CartResult add_to_cart(const std::string& session_id, const std::string& reference);

  // One-shot search outside any session. `used` receives the inventory snapshot the
  // search ran against.
  SearchOutcome search(const std::string& query, const std::optional<std::string>& profile_id,
                       std::size_t k, const FilterConstraints& constraints = {},
                       std::shared_ptr<const Inventory::Snapshot>* used = nullptr);

  const OrchestratorOptions& options() const { return options_; }

 private:
  ChatTurn run_pipeline_turn(Session& session, const std::string& message, const IntentDecision& d,
                             const std::vector<ChatMessage>& window);
  ChatTurn cart_turn(Session& session, const std::string& message);
  ChatTurn smalltalk_turn(const std::string& message, const std::vector<ChatMessage>& window);

  Inventory& inventory_;
  ProfileStore& profiles_;
  SessionStore& sessions_;
  const LlmContext& llm_;
  OrchestratorOptions options_;
};

}  // namespace commerce::agent
