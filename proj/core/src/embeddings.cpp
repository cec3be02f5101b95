#include "commerce/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

constexpr int kIndexFormatVersion = 1;

bool is_token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace

HashingEmbedder::HashingEmbedder(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ == 0) throw Error(ErrorCode::kInvalidArgument, "embedding dimension must be > 0");
}

std::string HashingEmbedder::tag() const {
  return "fnv1a-signed-hash-uni-bi-v1/" + std::to_string(dimension_);
}

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> unigrams;
  std::string current;
  for (char raw : text) {
    auto c = static_cast<unsigned char>(raw);
    if (is_token_byte(c)) {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : raw;
    } else if (!current.empty()) {
      unigrams.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) unigrams.push_back(std::move(current));

  std::vector<std::string> tokens = unigrams;
  for (std::size_t i = 0; i + 1 < unigrams.size(); ++i) {
    tokens.push_back(unigrams[i] + ' ' + unigrams[i + 1]);
  }
  return tokens;
}

Vector HashingEmbedder::embed(std::string_view text) const {
  Vector out(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    std::uint64_t hash = text::fnv1a64(token);
    double sign = (hash >> 63) == 0 ? 1.0 : -1.0;
    out[hash % dimension_] += sign;
  }
  double sum_sq = 0.0;
  for (double v : out) sum_sq += v * v;
  if (sum_sq == 0.0) return out;
  double norm = std::sqrt(sum_sq);
  for (double& v : out) v /= norm;
  return out;
}

Vector embed_text(std::string_view text) {
  static const HashingEmbedder kReference;
  return kReference.embed(text);
}

double cosine_similarity(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "cosine_similarity: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()) + ")");
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

std::string indexed_text(const Product& product) {
  std::string out;
  auto append = [&out](std::string_view part) {
    if (part.empty()) return;
    if (!out.empty()) out += ' ';
    out += part;
  };
  append(product.title);
  for (const auto& segment : text::split_category(product.category)) append(segment);
  append(product.description);
  for (const auto& [name, value] : product.attributes) append(value);
  return out;
}

bool ranks_before(const ScoredId& a, const ScoredId& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.id < b.id;
}

VectorIndex::VectorIndex(std::size_t dimension, std::string embedder_tag,
                         std::uint64_t catalog_generation, std::vector<Entry> entries)
    : dimension_(dimension),
      embedder_tag_(std::move(embedder_tag)),
      catalog_generation_(catalog_generation),
      entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].vector.size() != dimension_) {
      throw Error(ErrorCode::kInvalidArgument, "vector index entry has wrong dimension");
    }
    if (i > 0 && entries_[i].id == entries_[i - 1].id) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate id in vector index: " + entries_[i].id);
    }
  }
}

std::string VectorIndex::serialize() const {
  nlohmann::json doc;
  doc["format"] = kIndexFormatVersion;
  doc["dim"] = dimension_;
  doc["embedder_tag"] = embedder_tag_;
  doc["entries"] = nlohmann::json::array();
  for (const auto& entry : entries_) {
    doc["entries"].push_back({{"id", entry.id}, {"vector", entry.vector}});
  }
  return doc.dump();
}

VectorIndex build_vector_index(const Catalog& catalog, const Embedder& embedder) {
  std::vector<VectorIndex::Entry> entries;
  entries.reserve(catalog.size());
  for (const auto& [id, product] : catalog.products()) {
    entries.push_back({id, embedder.embed(indexed_text(product))});
  }
  return VectorIndex(embedder.dimension(), embedder.tag(), catalog.generation(),
                     std::move(entries));
}

void save_vector_index(const VectorIndex& index, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write vector index: " + path);
  out << index.serialize();
  if (!out) throw Error(ErrorCode::kIo, "failed writing vector index: " + path);
}

VectorIndex load_vector_index(const std::string& path, const Catalog& catalog,
                              const Embedder& embedder) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open vector index: " + path);
  auto doc = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error(ErrorCode::kParse, "vector index is not valid JSON: " + path);
  }
  if (doc.value("format", 0) != kIndexFormatVersion) {
    throw Error(ErrorCode::kParse, "unsupported vector index format");
  }
  if (doc.value("embedder_tag", std::string{}) != embedder.tag()) {
    throw Error(ErrorCode::kIndexMismatch, "vector index embedder tag '" +
                                               doc.value("embedder_tag", std::string{}) +
                                               "' does not match '" + embedder.tag() + "'");
  }
  auto dim = doc.value("dim", std::size_t{0});
  if (dim != embedder.dimension()) {
    throw Error(ErrorCode::kIndexMismatch, "vector index dimension mismatch");
  }
  std::vector<VectorIndex::Entry> entries;
  for (const auto& item : doc.at("entries")) {
    entries.push_back({item.at("id").get<std::string>(), item.at("vector").get<Vector>()});
  }
  if (entries.size() != catalog.size() ||
      !std::all_of(entries.begin(), entries.end(),
                   [&](const auto& e) { return catalog.find(e.id) != nullptr; })) {
    throw Error(ErrorCode::kIndexMismatch, "vector index ids do not match the catalog");
  }
  return VectorIndex(dim, embedder.tag(), catalog.generation(), std::move(entries));
}

std::vector<ScoredId> knn(const VectorIndex& index, const Vector& query, std::size_t k,
                          const std::unordered_set<std::string>* allow) {
  if (k == 0) return {};
  if (query.size() != index.dimension()) {
    throw Error(ErrorCode::kInvalidArgument, "knn: query dimension mismatch");
  }
  std::vector<ScoredId> scored;
  scored.reserve(allow ? std::min(allow->size(), index.size()) : index.size());
  for (const auto& entry : index.entries()) {
    if (allow && !allow->contains(entry.id)) continue;
    scored.push_back({entry.id, cosine_similarity(query, entry.vector)});
  }
  std::size_t take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take),
                    scored.end(), ranks_before);
  scored.resize(take);
  return scored;
}

}  // namespace commerce
