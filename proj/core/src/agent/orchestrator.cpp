#include "commerce/agent/orchestrator.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "commerce/errors.hpp"
#include "commerce/llm_gateway.hpp"
#include "commerce/text.hpp"

namespace commerce::agent {
namespace {

constexpr std::array<std::string_view, 10> kOrdinalWords = {
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth"};
constexpr std::array<std::string_view, 10> kOrdinalSuffixed = {
    "1st", "2nd", "3rd", "4th", "5th", "6th", "7th", "8th", "9th", "10th"};

bool id_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
}

// `id` occurs in `text` as a whole token.
bool mentions_id(std::string_view text, std::string_view id) {
  if (id.empty()) return false;
  for (auto pos = text.find(id); pos != std::string_view::npos; pos = text.find(id, pos + 1)) {
    bool left = pos == 0 || !id_char(text[pos - 1]);
    std::size_t end = pos + id.size();
    // A trailing '.' ends a sentence rather than continuing the id.
    bool right = end == text.size() || !id_char(text[end]) ||
                 (text[end] == '.' && (end + 1 == text.size() || !id_char(text[end + 1])));
    if (left && right) return true;
  }
  return false;
}

std::vector<std::string> words(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '#') {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && s.size() <= 3 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

// 1-based position named by the tokens. Bare numbers count only as the whole
// reference ("2") or after "number"/"item"/"option", so "2 pairs" is not a pick.
std::optional<std::size_t> ordinal(const std::vector<std::string>& tokens, std::size_t shown) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& w = tokens[i];
    for (std::size_t n = 0; n < kOrdinalWords.size(); ++n) {
      if (w == kOrdinalWords[n] || w == kOrdinalSuffixed[n]) return n + 1;
    }
    if (w == "last") return shown;
    if (w.size() > 1 && w.front() == '#' && all_digits(std::string_view(w).substr(1))) {
      return std::stoul(w.substr(1));
    }
    bool after_marker = i > 0 && (tokens[i - 1] == "number" || tokens[i - 1] == "item" ||
                                  tokens[i - 1] == "option" || tokens[i - 1] == "no");
    if (all_digits(w) && (tokens.size() == 1 || after_marker)) return std::stoul(w);
  }
  return std::nullopt;
}

std::vector<ChatMessage> memory_window(const Session& session, std::size_t window) {
  std::vector<ChatMessage> out;
  std::size_t start = session.turns.size() > window ? session.turns.size() - window : 0;
  for (std::size_t i = start; i < session.turns.size(); ++i) {
    const auto& t = session.turns[i];
    out.push_back({t.role == "user" ? Role::kUser : Role::kAssistant, t.text});
  }
  return out;
}

std::string results_reply(const RankedList& ranked, const Catalog& catalog) {
  if (ranked.items.empty()) {
    return "I could not find in-stock products that match. Try loosening a filter such as the "
           "price limit.";
  }
  std::string reply = fmt::format("Here {} {} option{}:", ranked.items.size() == 1 ? "is" : "are",
                                  ranked.items.size(), ranked.items.size() == 1 ? "" : "s");
  for (const auto& item : ranked.items) {
    const Product* p = catalog.find(item.product_id);
    if (!p) continue;
    reply += fmt::format("\n{}. {} ({} {})", item.rank, p->title,
                         text::format_number(p->price.amount), p->price.currency);
  }
  return reply;
}

ChatTurn apology(const Error& e, const std::string& trace_id) {
  ChatTurn turn;
  turn.role = "agent";
  turn.text = fmt::format("Sorry, I could not complete that request ({}). Please try again.",
                          error_code_name(e.code()));
  turn.error_code = std::string(error_code_name(e.code()));
  turn.trace_id = e.trace_id().empty() ? trace_id : e.trace_id();
  turn.degraded = true;
  turn.notes.push_back(e.what());
  return turn;
}

}  // namespace

std::optional<std::string> resolve_product_reference(const std::string& reference,
                                                     const std::vector<RankedItem>* shown,
                                                     const Catalog* catalog) {
  if (shown) {
    for (const auto& item : *shown) {
      if (mentions_id(reference, item.product_id)) return item.product_id;
    }
  }
  if (catalog) {
    std::string trimmed = text::trim(reference);
    if (catalog->find(trimmed)) return trimmed;
    for (const auto& id : catalog->all_ids()) {
      if (mentions_id(reference, id)) return id;
    }
  }
  if (shown && !shown->empty()) {
    if (auto n = ordinal(words(reference), shown->size()); n && *n >= 1 && *n <= shown->size()) {
      return (*shown)[*n - 1].product_id;
    }
  }
  return std::nullopt;
}

Orchestrator::Orchestrator(Inventory& inventory, ProfileStore& profiles, SessionStore& sessions,
                           const LlmContext& llm, OrchestratorOptions options)
    : inventory_(inventory), profiles_(profiles), sessions_(sessions), llm_(llm),
      options_(std::move(options)) {
  options_.weights.validate();
}

IntentDecision Orchestrator::classify_intent(const std::string& message,
                                             const std::vector<ChatMessage>& window) const {
  IntentDecision decision;
  try {
    auto call = render_call(llm_, "agent.intent", {{"message", message}}, window);
    auto response = complete_chat(llm_.backend, call.request);
    std::string label = response.parsed->value("intent", std::string{});
    decision.reset = response.parsed->value("reset", false);
    if (auto intent = parse_intent(label)) {
      decision.intent = *intent;
    } else {
      decision.degraded = true;
      decision.note = "unrecognized intent '" + label + "', searching instead";
    }
  } catch (const Error& e) {
    decision.degraded = true;
    decision.note = fmt::format("intent classification failed ({}), searching instead",
                                error_code_name(e.code()));
  }
  return decision;
}

ChatTurn Orchestrator::handle_turn(const std::string& session_id, const std::string& message) {
  if (text::trim(message).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "message must not be empty");
  }
  ChatTurn reply;
  bool found = sessions_.with_session(session_id, [&](Session& session) {
    auto window = memory_window(session, options_.memory_window);
    IntentDecision decision = classify_intent(message, window);

    ChatTurn user_turn;
    user_turn.role = "user";
    user_turn.text = message;
    user_turn.at = now_utc();
    session.turns.push_back(user_turn);

    if (decision.reset) session.constraints = FilterConstraints{};
    try {
      switch (decision.intent) {
        case Intent::kCartAdd:
          reply = cart_turn(session, message);
          break;
        case Intent::kSmalltalk:
          reply = smalltalk_turn(message, window);
          break;
        default:
          reply = run_pipeline_turn(session, message, decision, window);
          break;
      }
    } catch (const Error& e) {
      reply = apology(e, {});
    } catch (const std::exception& e) {
      reply = apology(Error(ErrorCode::kInternal, e.what()), {});
    }
    reply.role = "agent";
    reply.intent = decision.intent;
    if (decision.degraded) {
      reply.degraded = true;
      reply.notes.insert(reply.notes.begin(), decision.note);
    }
    reply.at = now_utc();
    session.last_active = reply.at;
    session.turns.push_back(reply);
  });
  if (!found) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  return reply;
}

ChatTurn Orchestrator::run_pipeline_turn(Session& session, const std::string& message,
                                         const IntentDecision& decision,
                                         const std::vector<ChatMessage>& window) {
  (void)decision;
  auto snap = inventory_.snapshot();
  std::optional<UserProfile> profile;
  if (session.user_id) profile = profiles_.get(*session.user_id);

  SearchDeps deps{*snap->catalog, *snap->index, inventory_.embedder(), llm_,
                  options_.retrieval, options_.weights, options_.results_k, options_.llm_rerank};
  SearchRequest request{message, profile ? &*profile : nullptr, session.constraints, window, {}};
  SearchOutcome outcome = run_search(request, deps);

  ChatTurn turn;
  turn.role = "agent";
  turn.timings = outcome.run.timings;
  turn.trace_id = outcome.run.trace_id;
  if (!outcome.ok()) {
    try {
      outcome.rethrow();
    } catch (const Error& e) {
      ChatTurn failed = apology(e, outcome.run.trace_id);
      failed.timings = outcome.run.timings;
      return failed;
    } catch (const std::exception& e) {
      ChatTurn failed = apology(Error(ErrorCode::kInternal, e.what()), outcome.run.trace_id);
      failed.timings = outcome.run.timings;
      return failed;
    }
  }

  session.constraints = outcome.applied;
  // Last line of defence: nothing leaves the agent unless the catalog has it and it
  // meets the constraints in force.
  for (const auto& item : outcome.ranked.items) {
    const Product* p = snap->catalog->find(item.product_id);
    if (p && satisfies(*p, outcome.applied)) {
      turn.products.push_back(item);
    } else {
      turn.notes.push_back("withheld ungrounded product '" + item.product_id + "'");
    }
  }
  for (std::size_t i = 0; i < turn.products.size(); ++i) turn.products[i].rank = i + 1;
  RankedList shown{turn.products, outcome.ranked.degraded, {}};
  turn.text = results_reply(shown, *snap->catalog);
  turn.degraded = outcome.ranked.degraded;
  turn.notes.insert(turn.notes.end(), outcome.stage1.notes.begin(), outcome.stage1.notes.end());
  turn.notes.insert(turn.notes.end(), outcome.ranked.notes.begin(), outcome.ranked.notes.end());
  return turn;
}

ChatTurn Orchestrator::cart_turn(Session& session, const std::string& message) {
  auto snap = inventory_.snapshot();
  ChatTurn turn;
  turn.role = "agent";
  auto id = resolve_product_reference(message, session.last_shown(), snap->catalog.get());
  const Product* product = id ? snap->catalog->find(*id) : nullptr;
  if (!product) {
    turn.text = session.last_shown()
                    ? "Which product should I add? Reply with its number in the list or its id."
                    : "I have not shown any products yet. What are you looking for?";
    turn.notes.push_back("unresolved cart reference");
    return turn;
  }
  if (std::find(session.cart.begin(), session.cart.end(), product->id) != session.cart.end()) {
    turn.text = product->title + " is already in your cart.";
  } else {
    session.cart.push_back(product->id);
    turn.text = "Added " + product->title + " to your cart.";
  }
  return turn;
}

ChatTurn Orchestrator::smalltalk_turn(const std::string& message,
                                      const std::vector<ChatMessage>& window) {
  ChatTurn turn;
  turn.role = "agent";
  try {
    auto call = render_call(llm_, "agent.smalltalk", {{"message", message}}, window);
    turn.text = text::trim(complete_chat(llm_.backend, call.request).raw_text);
  } catch (const Error& e) {
    turn.degraded = true;
    turn.notes.push_back(fmt::format("smalltalk reply failed ({})", error_code_name(e.code())));
  }
  if (turn.text.empty()) turn.text = "Hi! Tell me what you are shopping for and I will find options.";
  return turn;
}

CartResult Orchestrator::add_to_cart(const std::string& session_id, const std::string& reference) {
  auto snap = inventory_.snapshot();
  CartResult result;
  bool resolved = false;
  bool found = sessions_.with_session(session_id, [&](Session& session) {
    auto id = resolve_product_reference(reference, session.last_shown(), snap->catalog.get());
    if (!id || !snap->catalog->find(*id)) return;
    resolved = true;
    result.product_id = *id;
    result.duplicate =
        std::find(session.cart.begin(), session.cart.end(), *id) != session.cart.end();
    if (!result.duplicate) session.cart.push_back(*id);
    session.last_active = now_utc();
    result.cart = session.cart;
  });
  if (!found) throw Error(ErrorCode::kNotFound, "unknown session '" + session_id + "'");
  if (!resolved) throw Error(ErrorCode::kNotFound, "no product matches '" + reference + "'");
  return result;
}

SearchOutcome Orchestrator::search(const std::string& query,
                                   const std::optional<std::string>& profile_id, std::size_t k,
                                   const FilterConstraints& constraints,
                                   std::shared_ptr<const Inventory::Snapshot>* used) {
  if (text::trim(query).empty()) throw Error(ErrorCode::kInvalidArgument, "query must not be empty");
  std::optional<UserProfile> profile;
  if (profile_id) {
    profile = profiles_.get(*profile_id);
    if (!profile) throw Error(ErrorCode::kNotFound, "unknown profile '" + *profile_id + "'");
  }
  auto snap = inventory_.snapshot();
  if (used) *used = snap;
  SearchDeps deps{*snap->catalog, *snap->index, inventory_.embedder(), llm_,
                  options_.retrieval, options_.weights, k, options_.llm_rerank};
  SearchRequest request{query, profile ? &*profile : nullptr, constraints, {}, {}};
  return run_search(request, deps);
}

}  // namespace commerce::agent
