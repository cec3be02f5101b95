#include "commerce/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "commerce/bench.hpp"
#include "commerce/errors.hpp"
#include "commerce/llm_gateway.hpp"
#include "commerce/text.hpp"
#include "embedded_resources.hpp"

namespace commerce {
namespace {

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

// Winner of one ordered pass, expressed in terms of the original (a, b).
Winner one_pass(const std::string& prompt, const std::string& first, const std::string& second,
                bool swapped, const LlmContext& llm, std::string* rationale) {
  auto call = render_call(llm, "eval.pairwise",
                          {{"prompt", prompt}, {"first", first}, {"second", second}});
  auto response = complete_chat(llm.backend, call.request);
  const auto& doc = *response.parsed;
  if (rationale) *rationale = doc.value("rationale", std::string{});
  std::string verdict = doc.value("winner", std::string{"tie"});
  if (verdict == "first") return swapped ? Winner::kB : Winner::kA;
  if (verdict == "second") return swapped ? Winner::kA : Winner::kB;
  return Winner::kTie;
}

}  // namespace

RubricRegistry RubricRegistry::builtin() {
  RubricRegistry registry;
  for (const auto& resource : detail::embedded_resources()) {
    std::string_view path = resource.path;
    if (path.substr(0, 8) != "rubrics/" || path.size() < 12 ||
        path.substr(path.size() - 4) != ".txt") {
      continue;
    }
    registry.add(std::string(path.substr(8, path.size() - 12)), std::string(resource.body));
  }
  return registry;
}

void RubricRegistry::add(const std::string& name, const std::string& text) {
  if (name.empty() || name.find('@') != std::string::npos) {
    throw Error(ErrorCode::kInvalidArgument, "invalid rubric name '" + name + "'");
  }
  rubrics_[name] = Rubric{name, text, text::hex64(text::fnv1a64(text)).substr(0, 12)};
}

const Rubric& RubricRegistry::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read rubric " + path);
  std::stringstream body;
  body << in.rdbuf();
  std::string name = std::filesystem::path(path).stem().string();
  add(name, body.str());
  return rubrics_.at(name);
}

const Rubric& RubricRegistry::get(const std::string& name_or_id) const {
  auto at = name_or_id.find('@');
  std::string name = name_or_id.substr(0, at);
  auto it = rubrics_.find(name);
  if (it == rubrics_.end()) throw Error(ErrorCode::kNotFound, "unknown rubric '" + name + "'");
  if (at != std::string::npos && name_or_id.substr(at + 1) != it->second.version) {
    throw Error(ErrorCode::kNotFound, "rubric '" + name_or_id + "' is not the registered revision " +
                                          it->second.id());
  }
  return it->second;
}

std::vector<std::string> RubricRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, rubric] : rubrics_) out.push_back(name);
  return out;
}

nlohmann::json to_json(const QualityScore& score) {
  return {{"score", score.value}, {"rubric_id", score.rubric_id}, {"rationale", score.rationale}};
}

QualityScore judge_quality(const std::string& prompt, const std::string& output,
                           const Rubric& rubric, const LlmContext& llm) {
  auto call = render_call(llm, "eval.quality",
                          {{"rubric", rubric.text}, {"prompt", prompt}, {"output", output}});
  auto response = complete_chat(llm.backend, call.request);
  const auto& doc = *response.parsed;
  QualityScore score;
  score.value = doc.at("score").get<int>();
  score.rubric_id = rubric.id();
  score.rationale = doc.value("rationale", std::string{});
  return score;
}

std::vector<EvalItem> load_eval_items(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read eval items " + path);
  std::vector<EvalItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto doc = nlohmann::json::parse(line);
      EvalItem item;
      item.id = doc.value("id", std::to_string(items.size()));
      item.prompt = doc.at("prompt").get<std::string>();
      item.output = doc.at("output").get<std::string>();
      items.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

std::size_t BatchResult::scored() const {
  return static_cast<std::size_t>(
      std::count_if(scores.begin(), scores.end(), [](const auto& s) { return s.has_value(); }));
}

std::optional<double> BatchResult::mean() const {
  auto v = values();
  if (v.empty()) return std::nullopt;
  double sum = 0.0;
  for (int x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::vector<int> BatchResult::values() const {
  std::vector<int> out;
  for (const auto& s : scores) {
    if (s) out.push_back(s->value);
  }
  return out;
}

BatchResult judge_batch(const std::vector<EvalItem>& items, const Rubric& rubric,
                        const LlmContext& llm, std::size_t concurrency) {
  BatchResult result;
  result.rubric_id = rubric.id();
  result.scores.resize(items.size());
  std::vector<std::string> item_errors(items.size());

  auto judge = [&](std::size_t i) {
    try {
      result.scores[i] = judge_quality(items[i].prompt, items[i].output, rubric, llm);
    } catch (const Error& e) {
      item_errors[i] = fmt::format("{}: {}: {}", items[i].id, error_code_name(e.code()), e.what());
    } catch (const std::exception& e) {
      item_errors[i] = fmt::format("{}: internal_error: {}", items[i].id, e.what());
    }
  };

  concurrency = std::clamp<std::size_t>(concurrency, 1, std::max<std::size_t>(items.size(), 1));
  if (concurrency == 1) {
    for (std::size_t i = 0; i < items.size(); ++i) judge(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < concurrency; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < items.size(); i = next++) judge(i);
      });
    }
    for (auto& t : workers) t.join();
  }
  for (auto& e : item_errors) {
    if (!e.empty()) result.errors.push_back(std::move(e));
  }
  return result;
}

std::string_view winner_name(Winner winner) {
  switch (winner) {
    case Winner::kA: return "A";
    case Winner::kB: return "B";
    case Winner::kTie: return "tie";
  }
  return "tie";
}

Winner parse_winner(std::string_view name) {
  std::string lower = text::ascii_lower(name);
  if (lower == "a") return Winner::kA;
  if (lower == "b") return Winner::kB;
  if (lower == "tie") return Winner::kTie;
  throw Error(ErrorCode::kParse, "unknown winner '" + std::string(name) + "'");
}

nlohmann::json to_json(const PairwiseJudgment& judgment) {
  return {{"id", judgment.id},
          {"prompt", judgment.prompt},
          {"response_a", judgment.response_a},
          {"response_b", judgment.response_b},
          {"winner", winner_name(judgment.winner)},
          {"rationale", judgment.rationale}};
}

PairwiseJudgment pairwise_judgment_from_json(const nlohmann::json& json) {
  PairwiseJudgment out;
  try {
    out.id = json.value("id", std::string{});
    out.prompt = json.at("prompt").get<std::string>();
    out.response_a = json.at("response_a").get<std::string>();
    out.response_b = json.at("response_b").get<std::string>();
    out.winner = parse_winner(json.at("winner").get<std::string>());
    out.rationale = json.value("rationale", std::string{});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("pairwise judgment: ") + e.what());
  }
  return out;
}

PairwiseJudgment judge_pairwise(const std::string& prompt, const std::string& a,
                                const std::string& b, const LlmContext& llm) {
  PairwiseJudgment out{{}, prompt, a, b, Winner::kTie, {}};
  if (a == b) {
    out.rationale = "identical responses";
    return out;
  }
  std::string first_rationale;
  std::string second_rationale;
  Winner forward = one_pass(prompt, a, b, false, llm, &first_rationale);
  Winner backward = one_pass(prompt, b, a, true, llm, &second_rationale);
  if (forward == backward) {
    out.winner = forward;
    out.rationale = first_rationale;
  } else {
    out.winner = Winner::kTie;
    out.rationale = "verdict changed with presentation order";
  }
  return out;
}

nlohmann::json to_json(const E2EScore& score) {
  return {{"hypothetical_gen", score.hypothetical_gen},
          {"attr_extraction", score.attr_extraction},
          {"recommendation", score.recommendation},
          {"aggregate", score.aggregate}};
}

E2EScore compute_e2e_score(double hypothetical_gen, double attr_extraction, double recommendation) {
  for (double v : {hypothetical_gen, attr_extraction, recommendation}) {
    if (!(v >= 0.0 && v <= 5.0)) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("component mean {} outside [0, 5]", v));
    }
  }
  return {hypothetical_gen, attr_extraction, recommendation,
          (hypothetical_gen + attr_extraction + recommendation) / 3.0};
}

AggregateDelta aggregate_and_delta(const std::vector<double>& candidate,
                                   const std::vector<double>& baseline) {
  if (candidate.empty() || baseline.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "aggregate_and_delta needs non-empty score lists");
  }
  AggregateDelta out;
  out.mean_candidate = mean_of(candidate);
  out.mean_baseline = mean_of(baseline);
  out.percent_delta = percent_change(MetricKind::kQuality, out.mean_baseline, out.mean_candidate);
  return out;
}

std::string format_mean(double mean) { return fmt::format("{:.2f}", mean); }

std::string format_delta(const std::optional<double>& percent) {
  if (!percent) return "n/a";
  return fmt::format("{:+.1f}%", *percent);
}

nlohmann::json EvalReport::to_json() const {
  auto batch_json = [](const BatchResult& batch) {
    nlohmann::json scores = nlohmann::json::array();
    for (const auto& s : batch.scores) scores.push_back(s ? nlohmann::json(s->value) : nlohmann::json());
    return scores;
  };
  nlohmann::json out = {{"run_id", run_id},
                        {"rubric_id", rubric_id},
                        {"n_items", candidate.scores.size()}};
  nlohmann::json per_item = {{"candidate", batch_json(candidate)}};
  nlohmann::json means = nlohmann::json::object();
  auto mean_json = [](const BatchResult& batch) {
    auto m = batch.mean();
    return m ? nlohmann::json{{"value", *m}, {"display", format_mean(*m)}, {"n", batch.scored()}}
             : nlohmann::json{{"value", nullptr}, {"display", "n/a"}, {"n", 0}};
  };
  means["candidate"] = mean_json(candidate);
  nlohmann::json errors = {{"candidate", candidate.errors}};
  nlohmann::json deltas = nlohmann::json::object();
  if (baseline) {
    per_item["baseline"] = batch_json(*baseline);
    means["baseline"] = mean_json(*baseline);
    errors["baseline"] = baseline->errors;
    auto c = candidate.mean();
    auto b = baseline->mean();
    std::optional<double> delta;
    if (c && b) delta = percent_change(MetricKind::kQuality, *b, *c);
    deltas["quality"] = {{"percent_change", delta ? nlohmann::json(*delta) : nlohmann::json()},
                         {"display", format_delta(delta)}};
  }
  out["per_item"] = per_item;
  out["means"] = means;
  out["deltas"] = deltas;
  out["errors"] = errors;
  return out;
}

}  // namespace commerce
