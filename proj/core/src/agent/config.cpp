#include "commerce/agent/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "commerce/errors.hpp"

namespace commerce::agent {
namespace {

const std::set<std::string> kKnownKeys = {
    "host",          "port",          "threads",           "catalog_path",
    "index_path",    "templates_dir", "stub_script",       "profiles_path",
    "session_snapshot_path",          "feedback_log_path", "bench_reports_dir",
    "admin_api_key", "results_k",     "k_per_hypothetical", "k_final",
    "alpha",         "beta",          "llm_rerank",        "memory_window",
    "gateway",       "models"};

void env_string(const char* name, std::string& field) {
  if (const char* v = std::getenv(name); v && *v) field = v;
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::kParse, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kKnownKeys.count(key)) throw Error(ErrorCode::kParse, "unknown config key '" + key + "'");
  }
  ServiceConfig c;
  try {
    c.host = doc.value("host", c.host);
    c.port = doc.value("port", c.port);
    c.threads = doc.value("threads", c.threads);
    c.catalog_path = doc.value("catalog_path", c.catalog_path);
    c.index_path = doc.value("index_path", c.index_path);
    c.templates_dir = doc.value("templates_dir", c.templates_dir);
    c.stub_script = doc.value("stub_script", c.stub_script);
    c.profiles_path = doc.value("profiles_path", c.profiles_path);
    c.session_snapshot_path = doc.value("session_snapshot_path", c.session_snapshot_path);
    c.feedback_log_path = doc.value("feedback_log_path", c.feedback_log_path);
    c.bench_reports_dir = doc.value("bench_reports_dir", c.bench_reports_dir);
    c.admin_api_key = doc.value("admin_api_key", c.admin_api_key);
    c.results_k = doc.value("results_k", c.results_k);
    c.retrieval.k_per_hypothetical = doc.value("k_per_hypothetical", c.retrieval.k_per_hypothetical);
    c.retrieval.k_final = doc.value("k_final", c.retrieval.k_final);
    c.weights.alpha = doc.value("alpha", c.weights.alpha);
    c.weights.beta = doc.value("beta", c.weights.beta);
    c.llm_rerank = doc.value("llm_rerank", c.llm_rerank);
    c.memory_window = doc.value("memory_window", c.memory_window);
    if (doc.contains("gateway")) {
      const auto& g = doc["gateway"];
      c.gateway.backend_url = g.value("backend_url", c.gateway.backend_url);
      c.gateway.api_key = g.value("api_key", c.gateway.api_key);
      c.gateway.model_tag = g.value("model_tag", c.gateway.model_tag);
      c.gateway.timeout = std::chrono::milliseconds(
          g.value("timeout_ms", static_cast<long long>(c.gateway.timeout.count())));
    }
    c.models = doc.value("models", c.models);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("config: ") + e.what());
  }
  return c;
}

ServiceConfig ServiceConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, "config " + path + ": " + e.what());
  }
  return from_json(doc);
}

void ServiceConfig::apply_env() {
  env_string("COMMERCE_HOST", host);
  if (const char* v = std::getenv("COMMERCE_PORT"); v && *v) port = std::atoi(v);
  env_string("COMMERCE_CATALOG", catalog_path);
  env_string("COMMERCE_INDEX", index_path);
  env_string("COMMERCE_STUB_SCRIPT", stub_script);
  env_string("COMMERCE_ADMIN_KEY", admin_api_key);
  env_string("COMMERCE_BENCH_DIR", bench_reports_dir);
  gateway.apply_env();
}

void ServiceConfig::validate() const {
  if (port < 0 || port > 65535) throw Error(ErrorCode::kInvalidArgument, "port out of range");
  if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 1");
  if (results_k == 0) throw Error(ErrorCode::kInvalidArgument, "results_k must be >= 1");
  weights.validate();
}

nlohmann::json ServiceConfig::to_json() const {
  return {{"host", host},
          {"port", port},
          {"threads", threads},
          {"catalog_path", catalog_path},
          {"index_path", index_path},
          {"templates_dir", templates_dir},
          {"stub_script", stub_script},
          {"profiles_path", profiles_path},
          {"session_snapshot_path", session_snapshot_path},
          {"feedback_log_path", feedback_log_path},
          {"bench_reports_dir", bench_reports_dir},
          {"admin_api_key", admin_api_key.empty() ? "" : "***"},
          {"results_k", results_k},
          {"k_per_hypothetical", retrieval.k_per_hypothetical},
          {"k_final", retrieval.k_final},
          {"alpha", weights.alpha},
          {"beta", weights.beta},
          {"llm_rerank", llm_rerank},
          {"memory_window", memory_window},
          {"gateway",
           {{"backend_url", gateway.backend_url},
            {"api_key", gateway.api_key.empty() ? "" : "***"},
            {"model_tag", gateway.model_tag},
            {"timeout_ms", gateway.timeout.count()}}},
          {"models", models}};
}

}  // namespace commerce::agent
