#pragma once

#include <memory>
#include <string>

#include "commerce/agent/config.hpp"
#include "commerce/agent/inventory.hpp"
#include "commerce/agent/orchestrator.hpp"
#include "commerce/agent/session.hpp"
#include "commerce/embeddings.hpp"
#include "commerce/llm_gateway.hpp"
#include "commerce/prompt_templates.hpp"

namespace commerce::cli {

// Options shared by every command that talks to a model.
struct BackendOptions {
  std::string stub_script;    // scripted replies instead of a live endpoint
  std::string templates_dir;  // overrides the compiled-in templates
};

// Owns the backend, templates and LlmContext for one CLI invocation.
struct ModelRuntime {
  std::unique_ptr<ChatBackend> backend;
  TemplateStore templates;
  std::unique_ptr<LlmContext> llm;

  static std::unique_ptr<ModelRuntime> create(const BackendOptions& options,
                                              const GatewayConfig& gateway,
                                              const std::map<std::string, std::string>& models = {});
};

// Everything `serve`, `search`, `chat` and `bench` need.
struct ServiceRuntime {
  agent::ServiceConfig config;
  std::unique_ptr<ModelRuntime> model;
  std::shared_ptr<const Embedder> embedder;
  std::unique_ptr<agent::Inventory> inventory;
  agent::ProfileStore profiles;
  agent::SessionStore sessions;
  std::unique_ptr<agent::Orchestrator> orchestrator;

  static std::unique_ptr<ServiceRuntime> create(agent::ServiceConfig config);
};

}  // namespace commerce::cli
