#include "commerce/agent/session.hpp"

#include <array>
#include <fstream>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce::agent {
namespace {

constexpr std::array<std::pair<Intent, std::string_view>, 5> kIntentNames = {{
    {Intent::kSearch, "search"},
    {Intent::kRecommend, "recommend"},
    {Intent::kCompare, "compare"},
    {Intent::kCartAdd, "cart_add"},
    {Intent::kSmalltalk, "smalltalk"},
}};

}  // namespace

std::string_view intent_name(Intent intent) {
  for (const auto& [value, name] : kIntentNames) {
    if (value == intent) return name;
  }
  return "search";
}

std::optional<Intent> parse_intent(std::string_view name) {
  std::string key = text::ascii_lower(text::trim(name));
  for (const auto& [value, intent_text] : kIntentNames) {
    if (intent_text == key) return value;
  }
  return std::nullopt;
}

Timestamp now_utc() {
  return std::chrono::time_point_cast<std::chrono::seconds>(std::chrono::system_clock::now());
}

nlohmann::json to_json(const ChatTurn& turn) {
  nlohmann::json products = nlohmann::json::array();
  for (const auto& p : turn.products) products.push_back(to_json(p));
  nlohmann::json timings = nlohmann::json::array();
  for (const auto& t : turn.timings) timings.push_back(to_json(t));
  nlohmann::json out = {{"role", turn.role},         {"text", turn.text},
                        {"products", products},      {"timings", timings},
                        {"degraded", turn.degraded}, {"trace_id", turn.trace_id},
                        {"notes", turn.notes},       {"at", format_timestamp(turn.at)}};
  out["intent"] = turn.intent ? nlohmann::json(intent_name(*turn.intent)) : nlohmann::json();
  out["error_code"] = turn.error_code ? nlohmann::json(*turn.error_code) : nlohmann::json();
  return out;
}

ChatTurn chat_turn_from_json(const nlohmann::json& json) {
  ChatTurn turn;
  turn.role = json.at("role").get<std::string>();
  turn.text = json.at("text").get<std::string>();
  if (json.contains("intent") && json["intent"].is_string()) {
    turn.intent = parse_intent(json["intent"].get<std::string>());
  }
  for (const auto& p : json.value("products", nlohmann::json::array())) {
    RankedItem item;
    item.product_id = p.at("product_id").get<std::string>();
    item.rank = p.value("rank", std::size_t{0});
    item.fused = p.value("fused", 0.0);
    item.retrieval = p.value("retrieval", 0.0);
    item.affinity = p.value("affinity", 0.0);
    item.explanation = p.value("explanation", std::string{});
    turn.products.push_back(std::move(item));
  }
  for (const auto& t : json.value("timings", nlohmann::json::array())) {
    auto stage = parse_stage(t.value("stage", std::string{}));
    if (!stage) continue;
    turn.timings.push_back({*stage, t.value("seconds", 0.0), t.value("trace_id", std::string{})});
  }
  turn.degraded = json.value("degraded", false);
  if (json.contains("error_code") && json["error_code"].is_string()) {
    turn.error_code = json["error_code"].get<std::string>();
  }
  turn.trace_id = json.value("trace_id", std::string{});
  turn.notes = json.value("notes", std::vector<std::string>{});
  if (json.contains("at")) turn.at = parse_timestamp(json["at"].get<std::string>());
  return turn;
}

const std::vector<RankedItem>* Session::last_shown() const {
  for (auto it = turns.rbegin(); it != turns.rend(); ++it) {
    if (it->role == "agent" && !it->products.empty()) return &it->products;
  }
  return nullptr;
}

nlohmann::json to_json(const Session& session) {
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : session.turns) turns.push_back(to_json(t));
  nlohmann::json out = {{"session_id", session.session_id},
                        {"turns", turns},
                        {"constraints", to_json(session.constraints)},
                        {"cart", session.cart},
                        {"created_at", format_timestamp(session.created_at)},
                        {"last_active", format_timestamp(session.last_active)}};
  out["user_id"] = session.user_id ? nlohmann::json(*session.user_id) : nlohmann::json();
  return out;
}

Session session_from_json(const nlohmann::json& json) {
  Session s;
  try {
    s.session_id = json.at("session_id").get<std::string>();
    if (json.contains("user_id") && json["user_id"].is_string()) {
      s.user_id = json["user_id"].get<std::string>();
    }
    for (const auto& t : json.value("turns", nlohmann::json::array())) {
      s.turns.push_back(chat_turn_from_json(t));
    }
    s.constraints = filter_constraints_from_json(json.value("constraints", nlohmann::json::object()));
    s.cart = json.value("cart", std::vector<std::string>{});
    s.created_at = parse_timestamp(json.at("created_at").get<std::string>());
    s.last_active = parse_timestamp(json.at("last_active").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("session: ") + e.what());
  }
  return s;
}

std::string SessionStore::create(std::optional<std::string> user_id) {
  auto e = std::make_shared<Entry>();
  e->session.user_id = std::move(user_id);
  e->session.created_at = e->session.last_active = now_utc();
  std::lock_guard lock(mu_);
  std::string id;
  do {
    id = text::random_token();
  } while (sessions_.count(id));
  e->session.session_id = id;
  sessions_.emplace(id, std::move(e));
  return id;
}

std::shared_ptr<SessionStore::Entry> SessionStore::entry(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::optional<Session> SessionStore::get(const std::string& id) const {
  auto e = entry(id);
  if (!e) return std::nullopt;
  std::lock_guard lock(e->mu);
  return e->session;
}

bool SessionStore::with_session(const std::string& id, const std::function<void(Session&)>& fn) {
  auto e = entry(id);
  if (!e) return false;
  std::lock_guard lock(e->mu);
  fn(e->session);
  return true;
}

bool SessionStore::append(const std::string& id, ChatTurn turn) {
  return with_session(id, [&](Session& s) {
    if (turn.at == Timestamp{}) turn.at = now_utc();
    s.last_active = turn.at;
    s.turns.push_back(std::move(turn));
  });
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, e] : sessions_) out.push_back(id);
  return out;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

void SessionStore::save_snapshot(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write session snapshot " + path);
  for (const auto& id : ids()) {
    if (auto s = get(id)) out << to_json(*s).dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void SessionStore::load_snapshot(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read session snapshot " + path);
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, "session snapshot: " + std::string(e.what()));
    }
    auto e = std::make_shared<Entry>();
    e->session = session_from_json(doc);
    std::lock_guard lock(mu_);
    sessions_[e->session.session_id] = std::move(e);
  }
}

}  // namespace commerce::agent
