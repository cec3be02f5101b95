#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/errors.hpp"

namespace commerce {

enum class Stage { kStage1Formulation, kRetrieval, kRanking, kEvaluator, kE2e };

std::string_view stage_name(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct StageTiming {
  Stage stage = Stage::kE2e;
  double seconds = 0.0;
  std::string trace_id;
};

nlohmann::json to_json(const StageTiming& timing);

// Monotonic time source; tests substitute a scripted one.
class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point now() const = 0;
};

class SteadyClock final : public Clock {
 public:
  time_point now() const override { return std::chrono::steady_clock::now(); }
};

const Clock& steady_clock();

struct StageStep {
  Stage stage;
  std::function<void()> run;
};

struct InstrumentedRun {
  std::string trace_id;
  std::vector<StageTiming> timings;  // completed stages in order, then e2e
  bool partial = false;
  std::optional<ErrorCode> error_code;
  std::string error_message;
  std::exception_ptr failure;

  const StageTiming* find(Stage stage) const;
};

// Runs the steps in order, timing each one and the whole run (e2e). A throwing step
// stops the run: completed stages keep their timings, the e2e timing covers the
// time until the failure, and the run is flagged partial with the exception kept.
InstrumentedRun instrument_run(const std::vector<StageStep>& steps, const std::string& trace_id,
                               const Clock& clock = steady_clock());

struct LatencyStats {
  Stage stage = Stage::kE2e;
  std::size_t n = 0;
  double mean = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

nlohmann::json to_json(const LatencyStats& stats);

// Nearest-rank percentile over an ascending sample: the value at 1-based rank
// ceil(p * n), with rank clamped to [1, n]. p in [0, 1]. Throws on an empty sample.
double nearest_rank_percentile(const std::vector<double>& sorted, double p);

// Per-stage statistics over the timings present. Throws Error(kInvalidArgument) when
// `timings` is empty.
std::map<Stage, LatencyStats> summarize(const std::vector<StageTiming>& timings);

enum class MetricKind { kLatency, kCost, kQuality };

std::string_view metric_kind_name(MetricKind kind);

struct MetricValue {
  std::string name;
  MetricKind kind = MetricKind::kLatency;
  double value = 0.0;
};

struct DeltaRow {
  std::string name;
  MetricKind kind = MetricKind::kLatency;
  double baseline = 0.0;
  double candidate = 0.0;
  std::optional<double> percent_change;  // empty when the baseline is 0
  std::string direction;
};

struct ReportMetadata {
  std::string baseline_label = "baseline";
  std::string candidate_label = "candidate";
  std::string created_at;
  std::string config_hash;
  std::string hardware_note;
};

struct DeltaReport {
  std::vector<DeltaRow> rows;
  ReportMetadata metadata;

  const DeltaRow* find(const std::string& name) const;
  nlohmann::json to_json() const;
  // Percentages rounded to one decimal here and only here.
  std::string to_markdown() const;
};

// Latency and cost: (baseline - candidate) / baseline * 100, positive = reduction.
// Quality: (candidate - baseline) / baseline * 100. Empty when baseline == 0.
std::optional<double> percent_change(MetricKind kind, double baseline, double candidate);

// Baseline and candidate must carry the same metric names and kinds (any order);
// rows follow the baseline's order. Throws Error(kInvalidArgument) otherwise.
DeltaReport compare(const std::vector<MetricValue>& baseline,
                    const std::vector<MetricValue>& candidate, ReportMetadata metadata = {});

// Reads the "stats" object of a CampaignResult JSON document back. Throws
// Error(kParse).
std::map<Stage, LatencyStats> stats_from_report(const nlohmann::json& report);

// "<stage>.mean_s", "<stage>.p50_s", "<stage>.p95_s" latency metrics.
std::vector<MetricValue> latency_metrics(const std::map<Stage, LatencyStats>& stats);

// GPU spend as hours x configured $/hour per backend label.
class CostModel {
 public:
  void set_rate(const std::string& backend_label, double dollars_per_hour);
  // Throws Error(kNotFound) for an unconfigured label.
  double cost(const std::string& backend_label, double hours) const;

 private:
  std::map<std::string, double> rates_;
};

struct CampaignConfig {
  std::string run_id;
  std::size_t n_requests = 1;
  std::size_t concurrency = 1;
  std::vector<std::string> workload;  // queries, used round-robin
  std::string raw_timings_path;       // JSONL, one line per completed request; optional
  double target_seconds = 2.0;        // e2e p95 threshold
};

struct CampaignResult {
  std::string run_id;
  std::size_t requested = 0;
  std::vector<InstrumentedRun> runs;  // request order; only issued requests
  std::map<Stage, LatencyStats> stats;
  std::size_t failed = 0;
  bool aborted = false;
  std::string abort_reason;
  bool meets_target = false;
  double target_seconds = 2.0;

  nlohmann::json to_json(const DeltaReport* delta = nullptr) const;
  std::string to_markdown(const DeltaReport* delta = nullptr) const;
};

using RequestExecutor =
    std::function<InstrumentedRun(const std::string& trace_id, const std::string& query)>;

// Issues n_requests through `execute` with up to `concurrency` in flight. Trace ids
// are "<run_id>-<index>". A transport failure stops new requests (aborted = true);
// raw timings already written stay on disk.
CampaignResult run_campaign(const CampaignConfig& config, const RequestExecutor& execute);

}  // namespace commerce
