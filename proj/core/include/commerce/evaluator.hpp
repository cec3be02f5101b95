#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/prompt_templates.hpp"

namespace commerce {

struct Rubric {
  std::string name;  // file stem, e.g. "hyde_quality"
  std::string text;
  std::string version;  // 12 hex digits of the text hash

  // "<name>@<version>"
  std::string id() const { return name + "@" + version; }
};

class RubricRegistry {
 public:
  // Rubrics compiled into the library (core/rubrics/*.txt).
  static RubricRegistry builtin();

  void add(const std::string& name, const std::string& text);
  // Registers `path` under its file stem. Throws Error(kIo).
  const Rubric& load_file(const std::string& path);
  // Accepts a bare name or a full "<name>@<version>" id. Throws Error(kNotFound),
  // also when the version part names another revision.
  const Rubric& get(const std::string& name_or_id) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, Rubric> rubrics_;
};

struct QualityScore {
  int value = 0;  // 0..5
  std::string rubric_id;
  std::string rationale;
};

nlohmann::json to_json(const QualityScore& score);

// One judge call. Scores outside 0..5 fail schema validation and surface as
// ValidationError; they are never clamped.
QualityScore judge_quality(const std::string& prompt, const std::string& output,
                           const Rubric& rubric, const LlmContext& llm);

struct EvalItem {
  std::string id;
  std::string prompt;
  std::string output;
};

// Reads {"id"?, "prompt", "output"} JSONL. Throws Error(kIo / kParse).
std::vector<EvalItem> load_eval_items(const std::string& path);

struct BatchResult {
  std::string rubric_id;
  std::vector<std::optional<QualityScore>> scores;  // input order
  std::vector<std::string> errors;                  // "<item id>: <code>: <message>"

  std::size_t scored() const;
  // Mean over the scored items, summed in input order. Empty when none scored.
  std::optional<double> mean() const;
  std::vector<int> values() const;
};

// Judges every item; a failing item is recorded and the batch continues. With
// concurrency > 1 items are judged on worker threads, results stay in input order.
BatchResult judge_batch(const std::vector<EvalItem>& items, const Rubric& rubric,
                        const LlmContext& llm, std::size_t concurrency = 1);

enum class Winner { kA, kB, kTie };

std::string_view winner_name(Winner winner);
// "A", "B", "tie" (case-insensitive). Throws Error(kParse).
Winner parse_winner(std::string_view name);

struct PairwiseJudgment {
  std::string id;
  std::string prompt;
  std::string response_a;
  std::string response_b;
  Winner winner = Winner::kTie;
  std::string rationale;
};

nlohmann::json to_json(const PairwiseJudgment& judgment);
PairwiseJudgment pairwise_judgment_from_json(const nlohmann::json& json);

// Judges (a, b) and then (b, a); the verdicts must agree on the same response or
// the result is a tie. Byte-identical responses tie without any model call.
PairwiseJudgment judge_pairwise(const std::string& prompt, const std::string& a,
                                const std::string& b, const LlmContext& llm);

struct E2EScore {
  double hypothetical_gen = 0.0;
  double attr_extraction = 0.0;
  double recommendation = 0.0;
  double aggregate = 0.0;
};

nlohmann::json to_json(const E2EScore& score);

// Equal-weight mean of the three component means. Throws Error(kInvalidArgument)
// when a component lies outside [0, 5].
E2EScore compute_e2e_score(double hypothetical_gen, double attr_extraction, double recommendation);

struct AggregateDelta {
  double mean_candidate = 0.0;
  double mean_baseline = 0.0;
  std::optional<double> percent_delta;  // empty when the baseline mean is 0
};

// Throws Error(kInvalidArgument) when either list is empty.
AggregateDelta aggregate_and_delta(const std::vector<double>& candidate,
                                   const std::vector<double>& baseline);

// Two decimals, e.g. 2.5 -> "2.50".
std::string format_mean(double mean);
// One decimal with sign, e.g. "+22.7%"; "n/a" when undefined.
std::string format_delta(const std::optional<double>& percent);

struct EvalReport {
  std::string run_id;
  std::string rubric_id;
  BatchResult candidate;
  std::optional<BatchResult> baseline;

  nlohmann::json to_json() const;
};

}  // namespace commerce
