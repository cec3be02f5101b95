#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/bench.hpp"
#include "commerce/catalog.hpp"
#include "commerce/personalization.hpp"
#include "commerce/ranking.hpp"

namespace commerce::agent {

enum class Intent { kSearch, kRecommend, kCompare, kCartAdd, kSmalltalk };

std::string_view intent_name(Intent intent);
std::optional<Intent> parse_intent(std::string_view name);

struct ChatTurn {
  std::string role;  // "user" or "agent"
  std::string text;
  std::optional<Intent> intent;  // agent turns only
  std::vector<RankedItem> products;
  std::vector<StageTiming> timings;
  bool degraded = false;
  std::optional<std::string> error_code;
  std::string trace_id;
  std::vector<std::string> notes;
  Timestamp at{};
};

nlohmann::json to_json(const ChatTurn& turn);
ChatTurn chat_turn_from_json(const nlohmann::json& json);

struct Session {
  std::string session_id;
  std::optional<std::string> user_id;
  std::vector<ChatTurn> turns;
  FilterConstraints constraints;  // accumulated hard constraints
  std::vector<std::string> cart;
  Timestamp created_at{};
  Timestamp last_active{};

  // Products of the most recent agent turn that showed any; nullptr when none has.
  const std::vector<RankedItem>* last_shown() const;
};

nlohmann::json to_json(const Session& session);
Session session_from_json(const nlohmann::json& json);

Timestamp now_utc();

// In-memory sessions. Ids are 128-bit random hex strings. Work on one session is
// serialized by a per-session lock; different sessions proceed independently.
class SessionStore {
 public:
  std::string create(std::optional<std::string> user_id = std::nullopt);
  // Copy of the session, or nullopt for an unknown id.
  std::optional<Session> get(const std::string& id) const;
  // Runs `fn` under the session's lock. Returns false for an unknown id.
  bool with_session(const std::string& id, const std::function<void(Session&)>& fn);
  bool append(const std::string& id, ChatTurn turn);
  std::vector<std::string> ids() const;
  std::size_t size() const;

  // One Session document per line. Throws Error(kIo / kParse).
  void save_snapshot(const std::string& path) const;
  void load_snapshot(const std::string& path);

 private:
  struct Entry {
    std::mutex mu;
    Session session;
  };
  std::shared_ptr<Entry> entry(const std::string& id) const;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace commerce::agent
