// commerce: command-line front end for the search pipeline, agent service,
// evaluator, dataset exporters and latency campaigns.
#include <csignal>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "commerce/agent/http_api.hpp"
#include "commerce/agent/search_pipeline.hpp"
#include "commerce/bench.hpp"
#include "commerce/dataset.hpp"
#include "commerce/errors.hpp"
#include "commerce/evaluator.hpp"
#include "commerce/personalization.hpp"
#include "commerce/text.hpp"
#include "runtime.hpp"

namespace fs = std::filesystem;
using namespace commerce;

namespace {

void write_text(const std::string& path, const std::string& body) {
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << body;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!text::trim(line).empty()) out.push_back(text::trim(line));
  }
  return out;
}

struct ServiceFlags {
  std::string config_path;
  std::string catalog;
  std::string index;
  std::string profiles;
  cli::BackendOptions backend;
  std::size_t k = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Service config file (JSON)");
    cmd->add_option("--catalog", catalog, "Catalog JSONL file");
    cmd->add_option("--index", index, "Prebuilt vector index (built in memory when absent)");
    cmd->add_option("--profiles", profiles, "User profiles JSONL");
    cmd->add_option("--stub-script", backend.stub_script, "Scripted model replies (no network)");
    cmd->add_option("--templates", backend.templates_dir, "Prompt template directory override");
    cmd->add_option("-k,--k", k, "Number of ranked results");
  }

  agent::ServiceConfig resolve() const {
    agent::ServiceConfig c = config_path.empty() ? agent::ServiceConfig{}
                                                 : agent::ServiceConfig::load_file(config_path);
    c.apply_env();
    if (!catalog.empty()) c.catalog_path = catalog;
    if (!index.empty()) c.index_path = index;
    if (!profiles.empty()) c.profiles_path = profiles;
    if (!backend.stub_script.empty()) c.stub_script = backend.stub_script;
    if (!backend.templates_dir.empty()) c.templates_dir = backend.templates_dir;
    if (k > 0) c.results_k = k;
    return c;
  }
};

int cmd_serve(ServiceFlags& flags, const std::string& host, int port) {
  auto config = flags.resolve();
  if (!host.empty()) config.host = host;
  if (port >= 0) config.port = port;

  // Block termination signals before any thread starts so only the waiter sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  auto rt = cli::ServiceRuntime::create(config);
  if (!config.session_snapshot_path.empty() && fs::exists(config.session_snapshot_path)) {
    rt->sessions.load_snapshot(config.session_snapshot_path);
  }
  agent::ApiServer server(*rt->orchestrator, *rt->inventory, rt->sessions,
                          {config.admin_api_key, config.bench_reports_dir, config.feedback_log_path,
                           rt->model->backend->tag(), config.threads});
  int bound = server.bind(config.host, config.port);
  std::cerr << fmt::format("listening on {}:{} ({} products)\n", config.host, bound,
                           rt->inventory->snapshot()->catalog->size());
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  server.run();
  // run() can also return on a bind/listen failure; wake the waiter either way.
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  if (!config.session_snapshot_path.empty()) rt->sessions.save_snapshot(config.session_snapshot_path);
  return 0;
}

int cmd_ingest(const std::string& path, const std::string& index_out, bool ignore_unknown) {
  auto result = ingest_catalog_file(path, {ignore_unknown});
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : result.report.rejected) rejected.push_back({{"line", r.line}, {"reason", r.reason}});
  if (!index_out.empty()) {
    HashingEmbedder embedder;
    save_vector_index(build_vector_index(*result.catalog, embedder), index_out);
  }
  std::cout << nlohmann::json{{"accepted", result.report.accepted}, {"rejected", rejected}}.dump(2)
            << "\n";
  return result.report.rejected.empty() ? 0 : 3;
}

int cmd_search(ServiceFlags& flags, const std::string& query, const std::string& profile_id,
               const std::string& trace_out) {
  auto rt = cli::ServiceRuntime::create(flags.resolve());
  std::shared_ptr<const agent::Inventory::Snapshot> snap;
  std::optional<std::string> profile;
  if (!profile_id.empty()) profile = profile_id;
  auto outcome = rt->orchestrator->search(query, profile, rt->config.results_k, {}, &snap);
  if (!trace_out.empty() && outcome.ok()) {
    std::ofstream out(trace_out, std::ios::app);
    if (!out) throw Error(ErrorCode::kIo, "cannot append to " + trace_out);
    out << to_json(outcome.stage1).dump() << "\n";
  }
  outcome.rethrow();
  std::cout << outcome.to_json(*snap->catalog).dump(2) << "\n";
  return 0;
}

int cmd_chat(ServiceFlags& flags, const std::string& user_id) {
  auto rt = cli::ServiceRuntime::create(flags.resolve());
  std::optional<std::string> user;
  if (!user_id.empty()) user = user_id;
  std::string session = rt->sessions.create(user);
  std::cout << "session " << session << " (empty line or /quit to exit)\n";
  for (std::string line; std::cout << "> " << std::flush, std::getline(std::cin, line);) {
    if (text::trim(line).empty() || line == "/quit") break;
    auto turn = rt->orchestrator->handle_turn(session, line);
    std::cout << "[" << agent::intent_name(turn.intent.value_or(agent::Intent::kSearch)) << "] "
              << turn.text << "\n";
    for (const auto& t : turn.timings) {
      std::cout << fmt::format("  {:<20} {:8.1f} ms\n", stage_name(t.stage), t.seconds * 1000.0);
    }
  }
  return 0;
}

int cmd_profile_build(const std::string& events_path, const std::string& demographics,
                      const std::string& now_text, const cli::BackendOptions& backend, bool summarize,
                      const std::string& out_path) {
  std::map<std::string, std::vector<PurchaseEvent>> by_user;
  for (const auto& doc : read_jsonl(events_path)) {
    auto event = purchase_event_from_json(doc);
    by_user[event.user_id].push_back(std::move(event));
  }
  Timestamp now = now_text.empty() ? agent::now_utc() : parse_timestamp(now_text);
  std::unique_ptr<cli::ModelRuntime> model;
  if (summarize) {
    GatewayConfig gateway;
    gateway.apply_env();
    model = cli::ModelRuntime::create(backend, gateway);
  }
  std::optional<std::string> demo;
  if (!demographics.empty()) demo = demographics;
  std::string body;
  for (auto& [user, events] : by_user) {
    auto profile = build_profile(std::move(events), demo, now, model ? model->llm.get() : nullptr);
    body += to_json(profile).dump() + "\n";
  }
  write_text(out_path, body);
  return 0;
}

int cmd_bench_run(ServiceFlags& flags, CampaignConfig campaign, const std::string& workload_path,
                  const std::string& report_dir, const std::string& baseline_path, double gpu_rate) {
  auto config = flags.resolve();
  auto rt = cli::ServiceRuntime::create(config);
  campaign.workload = read_lines(workload_path);
  if (campaign.run_id.empty()) campaign.run_id = "run-" + text::random_token().substr(0, 8);
  auto snap = rt->inventory->snapshot();
  agent::SearchDeps deps{*snap->catalog, *snap->index, *rt->embedder, *rt->model->llm,
                         config.retrieval, config.weights, config.results_k, config.llm_rerank};

  auto started = std::chrono::steady_clock::now();
  auto result = run_campaign(campaign, [&](const std::string& trace_id, const std::string& query) {
    agent::SearchRequest request{query, nullptr, {}, {}, trace_id};
    return agent::run_search(request, deps).run;
  });
  double wall_hours =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count() / 3600.0;

  std::vector<MetricValue> metrics = latency_metrics(result.stats);
  nlohmann::json cost;
  if (gpu_rate > 0) {
    CostModel model;
    model.set_rate("gpu", gpu_rate);
    cost = {{"rate_per_hour", gpu_rate}, {"hours", wall_hours}, {"usd", model.cost("gpu", wall_hours)}};
    metrics.push_back({"gpu_cost_usd", MetricKind::kCost, cost["usd"].get<double>()});
  }

  std::optional<DeltaReport> delta;
  if (!baseline_path.empty()) {
    std::ifstream in(baseline_path);
    if (!in) throw Error(ErrorCode::kIo, "cannot read baseline " + baseline_path);
    nlohmann::json baseline;
    in >> baseline;
    auto baseline_metrics = latency_metrics(stats_from_report(baseline));
    if (baseline.contains("cost") && cost.is_object()) {
      baseline_metrics.push_back({"gpu_cost_usd", MetricKind::kCost, baseline["cost"]["usd"].get<double>()});
    }
    // Only metrics present on both sides are compared.
    std::vector<MetricValue> both_base, both_cand;
    for (const auto& m : baseline_metrics) {
      for (const auto& c : metrics) {
        if (c.name == m.name) {
          both_base.push_back(m);
          both_cand.push_back(c);
        }
      }
    }
    delta = compare(both_base, both_cand,
                    {baseline.value("run_id", std::string("baseline")), result.run_id,
                     format_timestamp(agent::now_utc()), "", ""});
  }
  auto json = result.to_json(delta ? &*delta : nullptr);
  if (cost.is_object()) json["cost"] = cost;
  fs::create_directories(report_dir);
  write_text((fs::path(report_dir) / (result.run_id + ".json")).string(), json.dump(2) + "\n");
  write_text((fs::path(report_dir) / (result.run_id + ".md")).string(),
             result.to_markdown(delta ? &*delta : nullptr));
  std::cout << result.to_markdown(delta ? &*delta : nullptr);
  return result.aborted ? 4 : 0;
}

const Rubric& resolve_rubric(RubricRegistry& registry, const std::string& rubric) {
  if (fs::exists(rubric)) return registry.load_file(rubric);
  return registry.get(rubric);
}

int cmd_eval_run(const cli::BackendOptions& backend, const std::string& candidate,
                 const std::string& baseline, const std::string& rubric_name, std::string run_id,
                 std::size_t concurrency, const std::string& out_path) {
  GatewayConfig gateway;
  gateway.apply_env();
  auto model = cli::ModelRuntime::create(backend, gateway);
  auto registry = RubricRegistry::builtin();
  const Rubric& rubric = resolve_rubric(registry, rubric_name);
  if (run_id.empty()) run_id = "eval-" + text::random_token().substr(0, 8);

  EvalReport report;
  report.run_id = run_id;
  report.rubric_id = rubric.id();
  report.candidate = judge_batch(load_eval_items(candidate), rubric, *model->llm, concurrency);
  if (!baseline.empty()) {
    report.baseline = judge_batch(load_eval_items(baseline), rubric, *model->llm, concurrency);
  }
  write_text(out_path, report.to_json().dump(2) + "\n");
  return 0;
}

int cmd_eval_pairwise(const cli::BackendOptions& backend, const std::string& input,
                      const std::string& out_path) {
  GatewayConfig gateway;
  gateway.apply_env();
  auto model = cli::ModelRuntime::create(backend, gateway);
  std::string body;
  std::size_t n = 0;
  for (const auto& doc : read_jsonl(input)) {
    auto pick = [&](const char* k1, const char* k2) {
      return doc.contains(k1) ? doc.at(k1).get<std::string>() : doc.at(k2).get<std::string>();
    };
    auto judgment = judge_pairwise(doc.at("prompt").get<std::string>(), pick("response_a", "a"),
                                   pick("response_b", "b"), *model->llm);
    judgment.id = doc.value("id", std::to_string(n));
    body += to_json(judgment).dump() + "\n";
    ++n;
  }
  write_text(out_path, body);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Agentic commerce search: pipeline, agent service and evaluation tools"};
  app.require_subcommand(1);

  ServiceFlags serve_flags;
  std::string serve_host;
  int serve_port = -1;
  auto* serve = app.add_subcommand("serve", "Run the HTTP agent service");
  serve_flags.add_to(serve);
  serve->add_option("--host", serve_host, "Bind address");
  serve->add_option("--port", serve_port, "Port (0 picks a free one)");

  std::string ingest_path, index_out;
  bool ignore_unknown = false;
  auto* ingest = app.add_subcommand("ingest", "Validate a catalog file and optionally build its index");
  ingest->add_option("catalog", ingest_path, "Catalog JSONL")->required();
  ingest->add_option("--index-out", index_out, "Write the vector index here");
  ingest->add_flag("--ignore-unknown-keys", ignore_unknown, "Accept records with extra keys");

  ServiceFlags search_flags;
  std::string query, profile_id, trace_out;
  auto* search = app.add_subcommand("search", "Run one query through the pipeline");
  search_flags.add_to(search);
  search->add_option("query", query, "Shopper request")->required();
  search->add_option("--profile-id", profile_id, "Personalize for this user");
  search->add_option("--trace-out", trace_out, "Append the stage-1 trace (JSONL)");

  ServiceFlags chat_flags;
  std::string chat_user;
  auto* chat = app.add_subcommand("chat", "Interactive session on stdin");
  chat_flags.add_to(chat);
  chat->add_option("--user", chat_user, "User id for personalization");

  auto* profile = app.add_subcommand("profile", "Shopper profiles");
  profile->require_subcommand(1);
  std::string events_path, demographics, now_text, profile_out = "-";
  cli::BackendOptions profile_backend;
  bool summarize = false;
  auto* profile_build = profile->add_subcommand("build", "Build profiles from purchase events");
  profile_build->add_option("--events", events_path, "Purchase events JSONL")->required();
  profile_build->add_option("--demographics", demographics, "Free-text demographics note");
  profile_build->add_option("--now", now_text, "Reference time (UTC ISO-8601)");
  profile_build->add_flag("--summarize", summarize, "Add a model-written summary");
  profile_build->add_option("--stub-script", profile_backend.stub_script, "Scripted model replies");
  profile_build->add_option("--out", profile_out, "Output JSONL ('-' for stdout)");

  auto* bench = app.add_subcommand("bench", "Latency campaigns");
  bench->require_subcommand(1);
  ServiceFlags bench_flags;
  CampaignConfig campaign;
  std::string workload_path, report_dir = "bench_reports", baseline_path;
  double gpu_rate = 0.0;
  auto* bench_run = bench->add_subcommand("run", "Run a campaign and write its report");
  bench_flags.add_to(bench_run);
  bench_run->add_option("--workload", workload_path, "Queries, one per line")->required();
  bench_run->add_option("--n", campaign.n_requests, "Number of requests")->check(CLI::PositiveNumber);
  bench_run->add_option("--concurrency", campaign.concurrency, "Requests in flight")->check(CLI::PositiveNumber);
  bench_run->add_option("--run-id", campaign.run_id, "Report id");
  bench_run->add_option("--raw-timings", campaign.raw_timings_path, "Per-request timings JSONL");
  bench_run->add_option("--target", campaign.target_seconds, "e2e p95 target in seconds");
  bench_run->add_option("--report-out", report_dir, "Directory for <run-id>.json/.md");
  bench_run->add_option("--baseline", baseline_path, "Earlier report to compare against");
  bench_run->add_option("--gpu-rate", gpu_rate, "GPU $/hour for the cost line");

  auto* eval = app.add_subcommand("eval", "Model-as-judge evaluation");
  eval->require_subcommand(1);
  cli::BackendOptions eval_backend;
  std::string candidate, baseline, rubric = "hyde_quality", eval_run_id, eval_out = "-";
  std::size_t eval_concurrency = 1;
  auto* eval_run = eval->add_subcommand("run", "Score outputs against a rubric");
  eval_run->add_option("--candidate", candidate, "Items JSONL {id, prompt, output}")->required();
  eval_run->add_option("--baseline", baseline, "Baseline items JSONL");
  eval_run->add_option("--rubric", rubric, "Rubric name or file");
  eval_run->add_option("--run-id", eval_run_id, "Report id");
  eval_run->add_option("--concurrency", eval_concurrency, "Items judged in parallel");
  eval_run->add_option("--stub-script", eval_backend.stub_script, "Scripted judge replies");
  eval_run->add_option("--out", eval_out, "Report path ('-' for stdout)");
  std::string pairwise_in, pairwise_out = "-";
  auto* eval_pairwise = eval->add_subcommand("pairwise", "Position-debiased pairwise judging");
  eval_pairwise->add_option("--input", pairwise_in, "JSONL {id, prompt, response_a, response_b}")->required();
  eval_pairwise->add_option("--stub-script", eval_backend.stub_script, "Scripted judge replies");
  eval_pairwise->add_option("--out", pairwise_out, "Judgments JSONL ('-' for stdout)");

  auto* dataset = app.add_subcommand("dataset", "Fine-tuning dataset exports");
  dataset->require_subcommand(1);
  std::string traces_path, judgments_path, dataset_out;
  ExportOptions export_options;
  auto* export_sft_cmd = dataset->add_subcommand("export-sft", "Stage-1 traces to SFT JSONL");
  export_sft_cmd->add_option("--traces", traces_path, "Traces JSONL from search --trace-out")->required();
  auto* export_dpo_cmd = dataset->add_subcommand("export-dpo", "Pairwise judgments to DPO JSONL");
  export_dpo_cmd->add_option("--judgments", judgments_path, "Judgments JSONL")->required();
  for (auto* cmd : {export_sft_cmd, export_dpo_cmd}) {
    cmd->add_option("--out", dataset_out, "Output directory")->required();
    cmd->add_option("--seed", export_options.seed, "Shuffle seed");
    cmd->add_option("--ratio", export_options.train_ratio, "Training share")->check(CLI::Range(0.0, 1.0));
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve) return cmd_serve(serve_flags, serve_host, serve_port);
    if (*ingest) return cmd_ingest(ingest_path, index_out, ignore_unknown);
    if (*search) return cmd_search(search_flags, query, profile_id, trace_out);
    if (*chat) return cmd_chat(chat_flags, chat_user);
    if (*profile_build) {
      return cmd_profile_build(events_path, demographics, now_text, profile_backend, summarize,
                               profile_out);
    }
    if (*bench_run) {
      return cmd_bench_run(bench_flags, campaign, workload_path, report_dir, baseline_path, gpu_rate);
    }
    if (*eval_run) {
      return cmd_eval_run(eval_backend, candidate, baseline, rubric, eval_run_id, eval_concurrency,
                          eval_out);
    }
    if (*eval_pairwise) return cmd_eval_pairwise(eval_backend, pairwise_in, pairwise_out);
    if (*export_sft_cmd) {
      auto manifest = export_sft(read_jsonl(traces_path), dataset_out, export_options);
      std::cout << manifest.to_json().dump(2) << "\n";
      return 0;
    }
    if (*export_dpo_cmd) {
      std::vector<PairwiseJudgment> judgments;
      for (const auto& doc : read_jsonl(judgments_path)) {
        judgments.push_back(pairwise_judgment_from_json(doc));
      }
      auto manifest = export_dpo(judgments, dataset_out, export_options);
      std::cout << manifest.to_json().dump(2) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what();
    if (!e.trace_id().empty()) std::cerr << " (trace " << e.trace_id() << ")";
    std::cerr << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
