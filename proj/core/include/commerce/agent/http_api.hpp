#pragma once

#include <memory>
#include <string>

#include "commerce/agent/inventory.hpp"
#include "commerce/agent/orchestrator.hpp"
#include "commerce/agent/session.hpp"
#include "commerce/errors.hpp"

namespace commerce::agent {

struct ApiOptions {
  std::string admin_api_key;  // required in X-Api-Key for /v1/admin/* when set
  std::string bench_reports_dir = "bench_reports";
  std::string feedback_log_path = "feedback.jsonl";
  std::string backend_tag;
  int threads = 8;
};

// HTTP status used for each error code.
int http_status(ErrorCode code);

// JSON API over the orchestrator. Every error body is {code, message, trace_id}.
class ApiServer {
 public:
  ApiServer(Orchestrator& orchestrator, Inventory& inventory, SessionStore& sessions,
            ApiOptions options = {});
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Binds `host`; port 0 picks a free port. Returns the bound port. Throws Error(kIo).
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  void run();
  // bind() + run() on a background thread; returns the bound port.
  int start_background(const std::string& host, int port = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace commerce::agent
