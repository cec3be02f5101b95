#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/agent/orchestrator.hpp"
#include "commerce/agent/session.hpp"
#include "commerce/bench.hpp"
#include "commerce/catalog.hpp"
#include "commerce/prompt_templates.hpp"
#include "commerce/query_pipeline.hpp"
#include "commerce/stub_backend.hpp"

namespace commerce::testing {

std::filesystem::path data_path(const std::string& relative);
nlohmann::json read_json(const std::filesystem::path& path);

// tests/fixtures/catalog_500.jsonl, ingested once per process.
CatalogHandle fixture_catalog();
StubScript fixture_script();

inline const std::string kSkiQuery = "Suggest tech accessories for skiing";

// A stub backend wired to the built-in templates.
struct StubLlm {
  explicit StubLlm(StubScript script);
  StubBackend backend;
  TemplateStore templates;
  LlmContext llm;
};

std::unique_ptr<StubLlm> make_stub_llm(StubScript script);
std::unique_ptr<StubLlm> make_fixture_llm();

// Rule helpers.
StubRule rule(std::string template_id, nlohmann::json response,
              std::optional<std::string> contains = std::nullopt, int delay_ms = 0);
StubRule text_rule(std::string template_id, std::string response,
                   std::optional<std::string> contains = std::nullopt);

// Clock that only moves when told to.
class ManualClock final : public Clock {
 public:
  time_point now() const override;
  void advance(std::chrono::nanoseconds d);

 private:
  mutable std::mutex mu_;
  time_point now_{};
};

class TempDir {
 public:
  TempDir();
  ~TempDir();
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& path);

// Stage-1 output with 1..8 hypotheticals built from catalog vocabulary and random
// filler words, plus random hard constraints (some unsatisfiable).
Stage1Output random_stage1(std::mt19937_64& rng, const Catalog& catalog);

// Checks every product an agent surfaces: it must exist in the catalog and satisfy
// the constraints that were active for that turn.
class GroundingAuditor {
 public:
  void check_turn(const agent::ChatTurn& turn, const Catalog& catalog,
                  const FilterConstraints& active);
  void check_cart(const std::vector<std::string>& cart, const Catalog& catalog);
  std::size_t turns() const { return turns_; }
  std::size_t products_checked() const { return products_; }
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::size_t turns_ = 0;
  std::size_t products_ = 0;
  std::vector<std::string> violations_;
};

// Scripted shopping conversations exercising every intent, constraint carry-over,
// resets, failures and cart references. Roughly six turns each.
std::vector<std::vector<std::string>> audit_conversations();

// Runs every conversation through `orchestrator` in a fresh session (alternating
// between anonymous and profiled users) and audits each agent turn against the
// constraints the session holds after it. Returns the number of turns run.
std::size_t run_audited_conversations(agent::Orchestrator& orchestrator,
                                      agent::SessionStore& sessions, const Catalog& catalog,
                                      GroundingAuditor& auditor,
                                      const std::vector<std::string>& user_ids = {});

}  // namespace commerce::testing
