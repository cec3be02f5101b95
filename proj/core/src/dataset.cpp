#include "commerce/dataset.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>

#include "commerce/errors.hpp"
#include "commerce/query_pipeline.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

void write_file(const std::filesystem::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << body;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

template <typename T>
std::string jsonl(const std::vector<T>& rows) {
  std::string body;
  for (const auto& row : rows) body += to_json(row).dump() + "\n";
  return body;
}

template <typename T>
ExportManifest write_split(const std::vector<T>& rows, const std::string& out_dir,
                           const ExportOptions& options, ExportManifest manifest) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir + ": " + ec.message());

  auto [train, val] = split_dataset(rows, options.train_ratio, options.seed);
  manifest.train = train.size();
  manifest.val = val.size();
  manifest.seed = options.seed;
  manifest.train_ratio = options.train_ratio;
  write_file(fs::path(out_dir) / "train.jsonl", jsonl(train));
  write_file(fs::path(out_dir) / "val.jsonl", jsonl(val));
  write_file(fs::path(out_dir) / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

}  // namespace

nlohmann::json to_json(const SftExample& example) {
  nlohmann::json out = {{"prompt", example.prompt}, {"response", example.response}};
  if (!example.trace_id.empty()) out["trace_id"] = example.trace_id;
  return out;
}

nlohmann::json to_json(const PreferencePair& pair) {
  return {{"prompt", pair.prompt}, {"chosen", pair.chosen}, {"rejected", pair.rejected}};
}

std::uint64_t bounded_random(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound <= 1) return 0;
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  // The top (2^64 mod bound) values would favour small results; redraw them.
  const std::uint64_t excess = (kMax % bound + 1) % bound;
  std::uint64_t draw = rng();
  while (excess != 0 && draw > kMax - excess) draw = rng();
  return draw % bound;
}

std::size_t train_count(std::size_t n, double train_ratio) {
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_ratio + 1e-9));
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(
    std::size_t n, double train_ratio, std::uint64_t seed) {
  if (!(train_ratio >= 0.0 && train_ratio <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train ratio must lie in [0, 1]");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_random(rng, i));
    std::swap(order[i - 1], order[j]);
  }
  std::size_t cut = std::min(train_count(n, train_ratio), n);
  return {std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut)),
          std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end())};
}

nlohmann::json ExportManifest::to_json() const {
  nlohmann::json out = {{"schema_version", kDatasetSchemaVersion},
                        {"kind", kind},
                        {"counts", {{"train", train}, {"val", val}, {"total", train + val}}},
                        {"seed", seed},
                        {"ratio", {{"train", train_ratio}, {"val", 1.0 - train_ratio}}},
                        {"skipped", skipped}};
  if (kind == "dpo") {
    out["skipped_ties"] = skipped_ties;
    out["skipped_identical"] = skipped_identical;
  }
  return out;
}

SftExample sft_example_from_trace(const nlohmann::json& trace) {
  Stage1Output output = stage1_output_from_json(trace);
  if (text::trim(output.hyde_prompt).empty()) {
    throw Error(ErrorCode::kParse, "trace has no rendered generation prompt");
  }
  if (output.hypotheticals.empty()) {
    throw Error(ErrorCode::kParse, "trace has no hypothetical products");
  }
  return {output.hyde_prompt, hypotheticals_to_json(output.hypotheticals).dump(), output.trace_id};
}

ExportManifest export_sft(const std::vector<nlohmann::json>& traces, const std::string& out_dir,
                          const ExportOptions& options) {
  ExportManifest manifest;
  manifest.kind = "sft";
  std::vector<SftExample> rows;
  for (const auto& trace : traces) {
    try {
      rows.push_back(sft_example_from_trace(trace));
    } catch (const Error&) {
      ++manifest.skipped;
    }
  }
  return write_split(rows, out_dir, options, manifest);
}

ExportManifest export_dpo(const std::vector<PairwiseJudgment>& judgments,
                          const std::string& out_dir, const ExportOptions& options) {
  ExportManifest manifest;
  manifest.kind = "dpo";
  std::vector<PreferencePair> rows;
  for (const auto& j : judgments) {
    if (j.winner == Winner::kTie) {
      ++manifest.skipped_ties;
      continue;
    }
    if (j.response_a == j.response_b) {
      ++manifest.skipped_identical;
      continue;
    }
    bool a_wins = j.winner == Winner::kA;
    rows.push_back({j.prompt, a_wins ? j.response_a : j.response_b,
                    a_wins ? j.response_b : j.response_a, j.id});
  }
  return write_split(rows, out_dir, options, manifest);
}

std::vector<nlohmann::json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace commerce
