#include "commerce/agent/http_api.hpp"

#include <filesystem>
#include <fstream>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "commerce/text.hpp"

namespace commerce::agent {
namespace {

const std::regex kRunIdPattern("[A-Za-z0-9._-]{1,128}");

std::string request_trace_id(const httplib::Request& req) {
  std::string header = req.get_header_value("X-Trace-Id");
  if (!header.empty() && header.size() <= 128) return header;
  return "req-" + text::random_token().substr(0, 16);
}

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorCode code, const std::string& message,
                const std::string& trace_id) {
  send_json(res, http_status(code),
            {{"code", error_code_name(code)}, {"message", message}, {"trace_id", trace_id}});
}

nlohmann::json parse_object(const httplib::Request& req, bool allow_empty = false) {
  if (allow_empty && text::trim(req.body).empty()) return nlohmann::json::object();
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::parse_error&) {
    throw Error(ErrorCode::kParse, "request body is not valid JSON");
  }
  if (!body.is_object()) throw Error(ErrorCode::kInvalidArgument, "request body must be a JSON object");
  return body;
}

std::string required_string(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || !it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must be a string");
  }
  if (text::trim(it->get<std::string>()).empty()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must not be empty");
  }
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& body, const char* key) {
  auto it = body.find(key);
  if (it == body.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw Error(ErrorCode::kInvalidArgument, std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

nlohmann::json timings_json(const std::vector<StageTiming>& timings) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& t : timings) out.push_back({{"stage", stage_name(t.stage)}, {"ms", t.seconds * 1000.0}});
  return out;
}

}  // namespace

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kParse: return 400;
    case ErrorCode::kUnauthorized: return 401;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kIndexMismatch: return 409;
    case ErrorCode::kValidation:
    case ErrorCode::kGeneration:
    case ErrorCode::kTransport: return 502;
    case ErrorCode::kIo:
    case ErrorCode::kPipeline:
    case ErrorCode::kGrounding:
    case ErrorCode::kInternal: return 500;
  }
  return 500;
}

struct ApiServer::Impl {
  Orchestrator& orchestrator;
  Inventory& inventory;
  SessionStore& sessions;
  ApiOptions options;
  httplib::Server server;
  std::thread worker;
  std::mutex feedback_mu;

  using Handler = std::function<void(const httplib::Request&, httplib::Response&, const std::string&)>;

  httplib::Server::Handler wrap(Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
      std::string trace_id = request_trace_id(req);
      try {
        handler(req, res, trace_id);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what(), e.trace_id().empty() ? trace_id : e.trace_id());
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::kInternal, e.what(), trace_id);
      }
    };
  }

  void require_admin(const httplib::Request& req) const {
    if (options.admin_api_key.empty()) return;
    if (req.get_header_value("X-Api-Key") != options.admin_api_key) {
      throw Error(ErrorCode::kUnauthorized, "missing or wrong X-Api-Key");
    }
  }

  void routes() {
    server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      ErrorCode code = res.status == 404 ? ErrorCode::kNotFound : ErrorCode::kInvalidArgument;
      std::string message = res.status == 404 ? "no route for " + req.method + " " + req.path
                                              : "request rejected with HTTP " + std::to_string(res.status);
      int status = res.status;
      send_json(res, status,
                {{"code", error_code_name(code)}, {"message", message}, {"trace_id", request_trace_id(req)}});
      return httplib::Server::HandlerResponse::Handled;
    });

    server.Get("/v1/health", wrap([this](const httplib::Request&, httplib::Response& res, const std::string&) {
      auto snap = inventory.snapshot();
      send_json(res, 200,
                {{"status", "ok"},
                 {"catalog_size", snap->catalog->size()},
                 {"catalog_generation", snap->catalog->generation()},
                 {"index_size", snap->index->size()},
                 {"sessions", sessions.size()},
                 {"backend", options.backend_tag}});
    }));

    server.Post("/v1/sessions", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      auto body = parse_object(req, true);
      auto user_id = optional_string(body, "user_id");
      std::string id = sessions.create(user_id);
      send_json(res, 201, {{"session_id", id}, {"user_id", user_id ? nlohmann::json(*user_id) : nlohmann::json()}});
    }));

    server.Get(R"(/v1/sessions/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      auto session = sessions.get(req.matches[1]);
      if (!session) throw Error(ErrorCode::kNotFound, "unknown session");
      send_json(res, 200, to_json(*session));
    }));

    server.Post("/v1/chat", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      auto body = parse_object(req);
      std::string session_id = required_string(body, "session_id");
      std::string message = required_string(body, "message");
      ChatTurn turn = orchestrator.handle_turn(session_id, message);
      auto snap = inventory.snapshot();
      RankedList shown{turn.products, turn.degraded, {}};
      nlohmann::json out = {{"session_id", session_id},
                            {"reply", turn.text},
                            {"intent", intent_name(turn.intent.value_or(Intent::kSearch))},
                            {"products", product_cards(shown, *snap->catalog)},
                            {"timings", timings_json(turn.timings)},
                            {"degraded", turn.degraded},
                            {"trace_id", turn.trace_id},
                            {"notes", turn.notes}};
      out["error_code"] = turn.error_code ? nlohmann::json(*turn.error_code) : nlohmann::json();
      send_json(res, 200, out);
    }));

    server.Post("/v1/search", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string& trace_id) {
      auto body = parse_object(req);
      std::string query = required_string(body, "query");
      auto profile_id = optional_string(body, "profile_id");
      std::size_t k = orchestrator.options().results_k;
      if (body.contains("k")) {
        if (!body["k"].is_number_integer() || body["k"].get<long long>() < 1 ||
            body["k"].get<long long>() > 100) {
          throw Error(ErrorCode::kInvalidArgument, "field 'k' must be an integer in [1, 100]");
        }
        k = body["k"].get<std::size_t>();
      }
      FilterConstraints constraints;
      if (body.contains("constraints")) {
        if (!body["constraints"].is_object()) {
          throw Error(ErrorCode::kInvalidArgument, "field 'constraints' must be an object");
        }
        try {
          constraints = filter_constraints_from_json(body["constraints"]);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::kInvalidArgument, std::string("constraints: ") + e.what());
        }
        constraints.validate();
      }
      std::shared_ptr<const Inventory::Snapshot> snap;
      auto outcome = orchestrator.search(query, profile_id, k, constraints, &snap);
      if (!outcome.ok()) {
        try {
          outcome.rethrow();
        } catch (const Error& e) {
          send_error(res, e.code(), e.what(), outcome.run.trace_id.empty() ? trace_id : outcome.run.trace_id);
          return;
        }
      }
      send_json(res, 200, outcome.to_json(*snap->catalog));
    }));

    server.Get(R"(/v1/products/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      auto snap = inventory.snapshot();
      auto product = lookup(*snap->catalog, req.matches[1]);
      if (!product) throw Error(ErrorCode::kNotFound, "unknown product '" + std::string(req.matches[1]) + "'");
      send_json(res, 200, to_json(*product));
    }));

    server.Post(R"(/v1/cart/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      auto body = parse_object(req);
      std::string ref = required_string(body, "ref");
      std::string session_id = req.matches[1];
      auto result = orchestrator.add_to_cart(session_id, ref);
      send_json(res, 200,
                {{"session_id", session_id},
                 {"product_id", result.product_id},
                 {"duplicate", result.duplicate},
                 {"cart", result.cart}});
    }));

    server.Post("/v1/admin/catalog/ingest", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      require_admin(req);
      IngestReport report;
      std::string content_type = req.get_header_value("Content-Type");
      if (content_type.rfind("application/json", 0) == 0) {
        auto body = parse_object(req);
        if (auto path = optional_string(body, "path")) {
          report = inventory.ingest_file(*path);
        } else if (body.contains("records") && body["records"].is_array()) {
          std::string lines;
          for (const auto& record : body["records"]) lines += record.dump() + "\n";
          std::istringstream in(lines);
          report = inventory.ingest_stream(in);
        } else {
          throw Error(ErrorCode::kInvalidArgument, "expected 'path' or 'records'");
        }
      } else {
        std::istringstream in(req.body);
        report = inventory.ingest_stream(in);
      }
      nlohmann::json rejected = nlohmann::json::array();
      for (const auto& r : report.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
      auto snap = inventory.snapshot();
      send_json(res, 200,
                {{"accepted", report.accepted},
                 {"rejected", rejected},
                 {"catalog_size", snap->catalog->size()},
                 {"catalog_generation", snap->catalog->generation()}});
    }));

    server.Get(R"(/v1/bench/report/([^/]+))", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string&) {
      std::string run_id = req.matches[1];
      if (!std::regex_match(run_id, kRunIdPattern)) {
        throw Error(ErrorCode::kInvalidArgument, "invalid run id");
      }
      auto path = std::filesystem::path(options.bench_reports_dir) / (run_id + ".json");
      std::ifstream in(path);
      if (!in) throw Error(ErrorCode::kNotFound, "no bench report for run '" + run_id + "'");
      nlohmann::json report;
      try {
        in >> report;
      } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::kIo, "bench report is unreadable: " + std::string(e.what()));
      }
      send_json(res, 200, report);
    }));

    server.Post("/v1/feedback", wrap([this](const httplib::Request& req, httplib::Response& res, const std::string& trace_id) {
      auto body = parse_object(req);
      nlohmann::json entry = {{"trace_id", trace_id}, {"at", format_timestamp(now_utc())}};
      for (const char* key : {"session_id", "product_id", "text"}) {
        if (auto v = optional_string(body, key)) entry[key] = *v;
      }
      if (body.contains("rating")) {
        if (!body["rating"].is_number()) throw Error(ErrorCode::kInvalidArgument, "field 'rating' must be a number");
        entry["rating"] = body["rating"];
      }
      if (!entry.contains("rating") && !entry.contains("text")) {
        throw Error(ErrorCode::kInvalidArgument, "feedback needs 'rating' or 'text'");
      }
      {
        std::lock_guard lock(feedback_mu);
        std::ofstream out(options.feedback_log_path, std::ios::app);
        if (!out) throw Error(ErrorCode::kIo, "cannot append to feedback log");
        out << entry.dump() << '\n';
      }
      send_json(res, 202, {{"accepted", true}, {"trace_id", trace_id}});
    }));
  }
};

ApiServer::ApiServer(Orchestrator& orchestrator, Inventory& inventory, SessionStore& sessions,
                     ApiOptions options)
    : impl_(new Impl{orchestrator, inventory, sessions, std::move(options), {}, {}, {}}) {
  int threads = std::max(1, impl_->options.threads);
  impl_->server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
  impl_->routes();
}

ApiServer::~ApiServer() { stop(); }

int ApiServer::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host)
                        : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void ApiServer::run() { impl_->server.listen_after_bind(); }

int ApiServer::start_background(const std::string& host, int port) {
  int bound = bind(host, port);
  impl_->worker = std::thread([this] { run(); });
  impl_->server.wait_until_ready();
  return bound;
}

void ApiServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->worker.joinable()) impl_->worker.join();
}

}  // namespace commerce::agent
