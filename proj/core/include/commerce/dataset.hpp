#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "commerce/evaluator.hpp"

namespace commerce {

inline constexpr int kDatasetSchemaVersion = 1;

struct SftExample {
  std::string prompt;    // rendered stage-1 generation prompt
  std::string response;  // hypothetical products as compact JSON
  std::string trace_id;
};

nlohmann::json to_json(const SftExample& example);

// Field roles carry the ranks: chosen is rank 0, rejected is rank 1.
struct PreferencePair {
  std::string prompt;
  std::string chosen;
  std::string rejected;
  std::string judgment_id;
};

nlohmann::json to_json(const PreferencePair& pair);

// Uniform integer in [0, bound) from a 64-bit Mersenne Twister, by rejection so no
// value is favoured. Fixed here rather than left to a standard distribution, whose
// output differs between library implementations.
std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound);

// Number of training rows: floor(n * train_ratio), with a 1e-9 guard against
// representation error (0.7 * 10 must give 7).
std::size_t train_count(std::size_t n, double train_ratio);

// Shuffled row indices split into (train, validation). The shuffle is Fisher-Yates
// from the last position down, drawing with bounded_random on mt19937_64(seed).
// Throws Error(kInvalidArgument) unless 0 <= train_ratio <= 1.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed);

template <typename T>
std::pair<std::vector<T>, std::vector<T>> split_dataset(const std::vector<T>& rows,
                                                        double train_ratio, std::uint64_t seed) {
  auto [train_idx, val_idx] = split_indices(rows.size(), train_ratio, seed);
  std::pair<std::vector<T>, std::vector<T>> out;
  out.first.reserve(train_idx.size());
  out.second.reserve(val_idx.size());
  for (auto i : train_idx) out.first.push_back(rows[i]);
  for (auto i : val_idx) out.second.push_back(rows[i]);
  return out;
}

struct ExportOptions {
  std::uint64_t seed = 0;
  double train_ratio = 0.70;
};

struct ExportManifest {
  std::string kind;  // "sft" or "dpo"
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t skipped = 0;        // malformed inputs
  std::size_t skipped_ties = 0;   // dpo only
  std::size_t skipped_identical = 0;  // dpo only: chosen == rejected
  std::uint64_t seed = 0;
  double train_ratio = 0.70;

  nlohmann::json to_json() const;
};

// Converts a stage-1 trace (the JSON written by `search --trace-out`) to an SFT row.
// Throws Error(kParse) on a trace that is malformed or has no generation output.
SftExample sft_example_from_trace(const nlohmann::json& trace);

// Writes train.jsonl, val.jsonl and manifest.json into `out_dir` (created if
// needed). Malformed traces are skipped and counted. Throws Error(kIo).
ExportManifest export_sft(const std::vector<nlohmann::json>& traces, const std::string& out_dir,
                          const ExportOptions& options = {});

// Ties are skipped and counted; the winner becomes chosen, the loser rejected.
ExportManifest export_dpo(const std::vector<PairwiseJudgment>& judgments,
                          const std::string& out_dir, const ExportOptions& options = {});

// Reads a JSONL file into one JSON value per non-blank line. Throws Error(kIo/kParse).
std::vector<nlohmann::json> read_jsonl(const std::string& path);

}  // namespace commerce
