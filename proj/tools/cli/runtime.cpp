#include "runtime.hpp"

#include "commerce/errors.hpp"
#include "commerce/http_backend.hpp"
#include "commerce/stub_backend.hpp"

namespace commerce::cli {

std::unique_ptr<ModelRuntime> ModelRuntime::create(const BackendOptions& options,
                                                   const GatewayConfig& gateway,
                                                   const std::map<std::string, std::string>& models) {
  auto rt = std::make_unique<ModelRuntime>();
  if (!options.stub_script.empty()) {
    rt->backend = std::make_unique<StubBackend>(StubScript::load_file(options.stub_script));
  } else {
    if (gateway.backend_url.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no model backend: pass --stub-script or set BACKEND_URL");
    }
    rt->backend = std::make_unique<OpenAiHttpBackend>(gateway);
  }
  rt->templates = TemplateStore::builtin();
  if (!options.templates_dir.empty()) rt->templates.load_directory(options.templates_dir);
  rt->llm = std::make_unique<LlmContext>(
      LlmContext{*rt->backend, rt->templates, gateway.model_tag, models});
  return rt;
}

std::unique_ptr<ServiceRuntime> ServiceRuntime::create(agent::ServiceConfig config) {
  config.validate();
  auto rt = std::make_unique<ServiceRuntime>();
  rt->config = std::move(config);
  const auto& c = rt->config;
  rt->model = ModelRuntime::create({c.stub_script, c.templates_dir}, c.gateway, c.models);
  rt->embedder = std::make_shared<HashingEmbedder>();
  rt->inventory = std::make_unique<agent::Inventory>(rt->embedder);
  if (!c.catalog_path.empty()) {
    auto result = ingest_catalog_file(c.catalog_path);
    rt->inventory->install(result.catalog, c.index_path);
  }
  if (!c.profiles_path.empty()) rt->profiles.load_file(c.profiles_path);
  agent::OrchestratorOptions options{c.results_k, c.retrieval, c.weights, c.llm_rerank, c.memory_window};
  rt->orchestrator = std::make_unique<agent::Orchestrator>(*rt->inventory, rt->profiles, rt->sessions,
                                                           *rt->model->llm, options);
  return rt;
}

}  // namespace commerce::cli
