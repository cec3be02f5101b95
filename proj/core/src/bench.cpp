#include "commerce/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include <fmt/format.h>

namespace commerce {
namespace {

double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::max(0.0, std::chrono::duration<double>(b - a).count());
}

std::string render_percent(const std::optional<double>& value) {
  return value ? fmt::format("{:+.1f}%", *value) : "n/a";
}

std::string direction_label(MetricKind kind) {
  return kind == MetricKind::kQuality ? "change: (candidate - baseline) / baseline"
                                      : "reduction: (baseline - candidate) / baseline";
}

}  // namespace

std::string_view stage_name(Stage stage) {
  switch (stage) {
    case Stage::kStage1Formulation: return "stage1_formulation";
    case Stage::kRetrieval: return "retrieval";
    case Stage::kRanking: return "ranking";
    case Stage::kEvaluator: return "evaluator";
    case Stage::kE2e: return "e2e";
  }
  return "e2e";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : {Stage::kStage1Formulation, Stage::kRetrieval, Stage::kRanking, Stage::kEvaluator,
                  Stage::kE2e}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

nlohmann::json to_json(const StageTiming& timing) {
  return {{"stage", stage_name(timing.stage)},
          {"seconds", timing.seconds},
          {"trace_id", timing.trace_id}};
}

const Clock& steady_clock() {
  static const SteadyClock kClock;
  return kClock;
}

const StageTiming* InstrumentedRun::find(Stage stage) const {
  for (const auto& t : timings) {
    if (t.stage == stage) return &t;
  }
  return nullptr;
}

InstrumentedRun instrument_run(const std::vector<StageStep>& steps, const std::string& trace_id,
                               const Clock& clock) {
  InstrumentedRun run;
  run.trace_id = trace_id;
  const auto run_start = clock.now();
  for (const auto& step : steps) {
    const auto stage_start = clock.now();
    try {
      step.run();
    } catch (const Error& e) {
      run.partial = true;
      run.error_code = e.code();
      run.error_message = e.what();
      run.failure = std::current_exception();
    } catch (const std::exception& e) {
      run.partial = true;
      run.error_code = ErrorCode::kInternal;
      run.error_message = e.what();
      run.failure = std::current_exception();
    }
    if (run.partial) break;
    run.timings.push_back({step.stage, seconds_between(stage_start, clock.now()), trace_id});
  }
  run.timings.push_back({Stage::kE2e, seconds_between(run_start, clock.now()), trace_id});
  return run;
}

nlohmann::json to_json(const LatencyStats& stats) {
  return {{"stage", stage_name(stats.stage)}, {"n", stats.n},       {"mean_s", stats.mean},
          {"p50_s", stats.p50},               {"p95_s", stats.p95}, {"max_s", stats.max}};
}

double nearest_rank_percentile(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::kInvalidArgument, "percentile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "percentile outside [0,1]");
  const auto n = static_cast<double>(sorted.size());
  // A small tolerance keeps p*n that is integral in exact arithmetic (0.95 * 100)
  // from rounding up to the next rank.
  auto rank = static_cast<std::size_t>(std::ceil(p * n - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

std::map<Stage, LatencyStats> summarize(const std::vector<StageTiming>& timings) {
  if (timings.empty()) throw Error(ErrorCode::kInvalidArgument, "summarize: no timings");
  std::map<Stage, std::vector<double>> samples;
  for (const auto& t : timings) samples[t.stage].push_back(t.seconds);
  std::map<Stage, LatencyStats> out;
  for (auto& [stage, values] : samples) {
    std::sort(values.begin(), values.end());
    LatencyStats stats;
    stats.stage = stage;
    stats.n = values.size();
    // Sorted order makes the mean independent of input order.
    stats.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(stats.n);
    stats.p50 = nearest_rank_percentile(values, 0.50);
    stats.p95 = nearest_rank_percentile(values, 0.95);
    stats.max = values.back();
    out.emplace(stage, stats);
  }
  return out;
}

std::string_view metric_kind_name(MetricKind kind) {
  switch (kind) {
    case MetricKind::kLatency: return "latency";
    case MetricKind::kCost: return "cost";
    case MetricKind::kQuality: return "quality";
  }
  return "latency";
}

std::optional<double> percent_change(MetricKind kind, double baseline, double candidate) {
  if (baseline == 0.0) return std::nullopt;
  double delta = kind == MetricKind::kQuality ? candidate - baseline : baseline - candidate;
  return delta / baseline * 100.0;
}

const DeltaRow* DeltaReport::find(const std::string& name) const {
  for (const auto& row : rows) {
    if (row.name == name) return &row;
  }
  return nullptr;
}

DeltaReport compare(const std::vector<MetricValue>& baseline,
                    const std::vector<MetricValue>& candidate, ReportMetadata metadata) {
  if (baseline.size() != candidate.size()) {
    throw Error(ErrorCode::kInvalidArgument, "compare: baseline and candidate metric sets differ");
  }
  DeltaReport report;
  report.metadata = std::move(metadata);
  std::set<std::string> seen;
  for (const auto& b : baseline) {
    if (!seen.insert(b.name).second) {
      throw Error(ErrorCode::kInvalidArgument, "compare: duplicate metric '" + b.name + "'");
    }
    auto it = std::find_if(candidate.begin(), candidate.end(),
                           [&](const MetricValue& c) { return c.name == b.name; });
    if (it == candidate.end() || it->kind != b.kind) {
      throw Error(ErrorCode::kInvalidArgument, "compare: metric '" + b.name + "' missing or mismatched");
    }
    report.rows.push_back({b.name, b.kind, b.value, it->value,
                           percent_change(b.kind, b.value, it->value), direction_label(b.kind)});
  }
  return report;
}

nlohmann::json DeltaReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    nlohmann::json r = {{"name", row.name},
                        {"kind", metric_kind_name(row.kind)},
                        {"baseline", row.baseline},
                        {"candidate", row.candidate},
                        {"direction", row.direction}};
    r["percent_change"] = row.percent_change ? nlohmann::json(*row.percent_change) : nlohmann::json();
    r["percent_change_display"] = render_percent(row.percent_change);
    rows_json.push_back(std::move(r));
  }
  return {{"rows", rows_json},
          {"metadata",
           {{"baseline_label", metadata.baseline_label},
            {"candidate_label", metadata.candidate_label},
            {"created_at", metadata.created_at},
            {"config_hash", metadata.config_hash},
            {"hardware_note", metadata.hardware_note}}}};
}

std::string DeltaReport::to_markdown() const {
  std::string out = fmt::format("| metric | {} | {} | delta | convention |\n",
                                metadata.baseline_label, metadata.candidate_label);
  out += "|---|---|---|---|---|\n";
  for (const auto& row : rows) {
    out += fmt::format("| {} | {:.4g} | {:.4g} | {} | {} |\n", row.name, row.baseline,
                       row.candidate, render_percent(row.percent_change), row.direction);
  }
  if (!metadata.hardware_note.empty()) out += "\n" + metadata.hardware_note + "\n";
  return out;
}

std::map<Stage, LatencyStats> stats_from_report(const nlohmann::json& report) {
  std::map<Stage, LatencyStats> out;
  try {
    for (const auto& [name, s] : report.at("stats").items()) {
      auto stage = parse_stage(name);
      if (!stage) throw Error(ErrorCode::kParse, "unknown stage '" + name + "' in report");
      out[*stage] = LatencyStats{*stage,
                                 s.at("n").get<std::size_t>(),
                                 s.at("mean_s").get<double>(),
                                 s.at("p50_s").get<double>(),
                                 s.at("p95_s").get<double>(),
                                 s.at("max_s").get<double>()};
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bench report: ") + e.what());
  }
  return out;
}

std::vector<MetricValue> latency_metrics(const std::map<Stage, LatencyStats>& stats) {
  std::vector<MetricValue> out;
  for (const auto& [stage, s] : stats) {
    std::string prefix(stage_name(stage));
    out.push_back({prefix + ".mean_s", MetricKind::kLatency, s.mean});
    out.push_back({prefix + ".p50_s", MetricKind::kLatency, s.p50});
    out.push_back({prefix + ".p95_s", MetricKind::kLatency, s.p95});
  }
  return out;
}

void CostModel::set_rate(const std::string& backend_label, double dollars_per_hour) {
  if (dollars_per_hour < 0) throw Error(ErrorCode::kInvalidArgument, "negative GPU rate");
  rates_[backend_label] = dollars_per_hour;
}

double CostModel::cost(const std::string& backend_label, double hours) const {
  auto it = rates_.find(backend_label);
  if (it == rates_.end()) throw Error(ErrorCode::kNotFound, "no GPU rate for '" + backend_label + "'");
  return hours * it->second;
}

nlohmann::json CampaignResult::to_json(const DeltaReport* delta) const {
  nlohmann::json stats_json = nlohmann::json::object();
  for (const auto& [stage, s] : stats) stats_json[std::string(stage_name(stage))] = commerce::to_json(s);
  nlohmann::json out = {{"run_id", run_id},
                        {"requested", requested},
                        {"completed", runs.size()},
                        {"failed", failed},
                        {"aborted", aborted},
                        {"stats", stats_json}};
  if (aborted) out["abort_reason"] = abort_reason;
  nlohmann::json target = {{"threshold_s", target_seconds}, {"met", meets_target}};
  if (auto it = stats.find(Stage::kE2e); it != stats.end()) target["e2e_p95_s"] = it->second.p95;
  out["sub_target"] = target;
  if (delta) out["delta"] = delta->to_json();
  return out;
}

std::string CampaignResult::to_markdown(const DeltaReport* delta) const {
  std::string out = fmt::format("# Latency report `{}`\n\n", run_id);
  out += fmt::format("requests: {} issued, {} failed{}\n\n", runs.size(), failed,
                     aborted ? " (aborted: " + abort_reason + ")" : "");
  out += "| stage | n | mean (s) | p50 (s) | p95 (s) | max (s) |\n|---|---|---|---|---|---|\n";
  for (const auto& [stage, s] : stats) {
    out += fmt::format("| {} | {} | {:.4f} | {:.4f} | {:.4f} | {:.4f} |\n", stage_name(stage), s.n,
                       s.mean, s.p50, s.p95, s.max);
  }
  out += fmt::format("\ne2e p95 below {:.1f}s: {}\n", target_seconds, meets_target ? "yes" : "no");
  if (delta) out += "\n" + delta->to_markdown();
  return out;
}

CampaignResult run_campaign(const CampaignConfig& config, const RequestExecutor& execute) {
  if (config.workload.empty()) throw Error(ErrorCode::kInvalidArgument, "campaign workload is empty");
  if (config.concurrency == 0) throw Error(ErrorCode::kInvalidArgument, "concurrency must be >= 1");

  CampaignResult result;
  result.run_id = config.run_id;
  result.requested = config.n_requests;
  result.target_seconds = config.target_seconds;

  std::ofstream raw;
  if (!config.raw_timings_path.empty()) {
    raw.open(config.raw_timings_path, std::ios::binary | std::ios::trunc);
    if (!raw) throw Error(ErrorCode::kIo, "cannot write raw timings: " + config.raw_timings_path);
  }

  // Each request owns one slot; slots are only written by the worker that ran it.
  std::vector<std::optional<InstrumentedRun>> slots(config.n_requests);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex io_mu;
  std::string abort_reason;

  auto worker = [&]() {
    for (;;) {
      if (stop.load()) return;
      std::size_t index = next.fetch_add(1);
      if (index >= config.n_requests) return;
      std::string trace_id = fmt::format("{}-{:06d}", config.run_id, index);
      const std::string& query = config.workload[index % config.workload.size()];
      InstrumentedRun run = execute(trace_id, query);
      if (run.error_code == ErrorCode::kTransport) {
        std::lock_guard lock(io_mu);
        if (!stop.exchange(true)) abort_reason = run.error_message;
      }
      {
        std::lock_guard lock(io_mu);
        if (raw.is_open()) {
          nlohmann::json line = {{"trace_id", run.trace_id},
                                 {"query", query},
                                 {"partial", run.partial},
                                 {"timings", nlohmann::json::array()}};
          if (run.error_code) line["error"] = error_code_name(*run.error_code);
          for (const auto& t : run.timings) {
            line["timings"].push_back({{"stage", stage_name(t.stage)}, {"seconds", t.seconds}});
          }
          raw << line.dump() << '\n';
          raw.flush();
        }
      }
      slots[index] = std::move(run);
    }
  };

  std::vector<std::thread> threads;
  std::size_t workers = std::min(config.concurrency, std::max<std::size_t>(config.n_requests, 1));
  threads.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  std::vector<StageTiming> all;
  for (auto& slot : slots) {
    if (!slot) continue;
    if (slot->partial) ++result.failed;
    for (const auto& t : slot->timings) all.push_back(t);
    result.runs.push_back(std::move(*slot));
  }
  result.aborted = stop.load();
  result.abort_reason = abort_reason;
  if (!all.empty()) result.stats = summarize(all);
  if (auto it = result.stats.find(Stage::kE2e); it != result.stats.end()) {
    result.meets_target = !result.aborted && it->second.p95 < config.target_seconds;
  }
  return result;
}

}  // namespace commerce
