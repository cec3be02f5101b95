#pragma once

#include <cstddef>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "commerce/llm_gateway.hpp"
#include "commerce/ranking.hpp"
#include "commerce/retrieval.hpp"

namespace commerce::agent {

// Service configuration. File keys (all optional):
//   host, port, threads, catalog_path, index_path, templates_dir, stub_script,
//   profiles_path, session_snapshot_path, feedback_log_path, bench_reports_dir,
//   admin_api_key, results_k, k_per_hypothetical, k_final, alpha, beta, llm_rerank,
//   memory_window, gateway {backend_url, api_key, model_tag, timeout_ms},
//   models {"<template id>": "<model tag>"}
// Environment overrides: COMMERCE_HOST, COMMERCE_PORT, COMMERCE_CATALOG,
// COMMERCE_INDEX, COMMERCE_STUB_SCRIPT, COMMERCE_ADMIN_KEY, COMMERCE_BENCH_DIR, plus
// the gateway's BACKEND_URL, API_KEY, MODEL_TAG, TIMEOUT_MS.
struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  int threads = 8;
  std::string catalog_path;
  std::string index_path;
  std::string templates_dir;
  std::string stub_script;  // when set, the stub backend replaces the HTTP gateway
  std::string profiles_path;
  std::string session_snapshot_path;
  std::string feedback_log_path = "feedback.jsonl";
  std::string bench_reports_dir = "bench_reports";
  std::string admin_api_key;
  std::size_t results_k = 10;
  RetrievalOptions retrieval;
  RankWeights weights;
  bool llm_rerank = false;
  std::size_t memory_window = 6;  // earlier turns passed to the model
  GatewayConfig gateway;
  std::map<std::string, std::string> models;

  // Throws Error(kParse) on unknown keys or mistyped values, Error(kIo) on a
  // missing file.
  static ServiceConfig from_json(const nlohmann::json& doc);
  static ServiceConfig load_file(const std::string& path);
  void apply_env();
  // Throws Error(kInvalidArgument).
  void validate() const;
  nlohmann::json to_json() const;  // api keys redacted
};

}  // namespace commerce::agent
