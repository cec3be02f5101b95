#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "commerce/catalog.hpp"

namespace commerce {

using Vector = std::vector<double>;

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual Vector embed(std::string_view text) const = 0;
  virtual std::size_t dimension() const = 0;
  // Identity recorded in persisted indexes; loaders refuse a different tag.
  virtual std::string tag() const = 0;
};

// Signed feature hashing over lowercase alphanumeric unigrams and adjacent bigrams.
//
// Tokenization works on bytes: ASCII letters and digits, plus any byte >= 0x80 (so
// UTF-8 sequences stay inside their token), form tokens; everything else separates
// them. ASCII letters are lowercased. A bigram is "<left> <right>" with one space.
// Each token hashes with 64-bit FNV-1a; bucket = hash % dimension and the sign is
// negative when bit 63 is set. Bucket counts are L2-normalized; empty input stays
// the zero vector.
class HashingEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDefaultDimension = 256;

  explicit HashingEmbedder(std::size_t dimension = kDefaultDimension);

  Vector embed(std::string_view text) const override;
  std::size_t dimension() const override { return dimension_; }
  std::string tag() const override;

  static std::vector<std::string> tokenize(std::string_view text);

 private:
  std::size_t dimension_;
};

Vector embed_text(std::string_view text);

// Cosine in [-1, 1]; 0 when either vector is all zeros. Throws Error
// (kInvalidArgument) on dimension mismatch.
double cosine_similarity(const Vector& a, const Vector& b);

// title + " " + category segments joined by spaces + " " + description + " " +
// attribute values (attribute-name order), all single-space separated.
std::string indexed_text(const Product& product);

struct ScoredId {
  std::string id;
  double score = 0.0;

  bool operator==(const ScoredId&) const = default;
};

// (score desc, id asc).
bool ranks_before(const ScoredId& a, const ScoredId& b);

class VectorIndex {
 public:
  struct Entry {
    std::string id;
    Vector vector;
  };

  VectorIndex(std::size_t dimension, std::string embedder_tag, std::uint64_t catalog_generation,
              std::vector<Entry> entries);

  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& embedder_tag() const noexcept { return embedder_tag_; }
  std::uint64_t catalog_generation() const noexcept { return catalog_generation_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  // JSON document {format, dim, embedder_tag, entries:[{id, vector}]}.
  std::string serialize() const;

 private:
  std::size_t dimension_;
  std::string embedder_tag_;
  std::uint64_t catalog_generation_;
  std::vector<Entry> entries_;  // ordered by id
};

VectorIndex build_vector_index(const Catalog& catalog, const Embedder& embedder);

void save_vector_index(const VectorIndex& index, const std::string& path);

// Rejects a file written by a different embedder or for a different id set; the
// loaded index is bound to `catalog`'s generation.
VectorIndex load_vector_index(const std::string& path, const Catalog& catalog,
                              const Embedder& embedder);

// Exact top-k by cosine, restricted to `allow` when given. k == 0 yields nothing.
std::vector<ScoredId> knn(const VectorIndex& index, const Vector& query, std::size_t k,
                          const std::unordered_set<std::string>* allow = nullptr);

}  // namespace commerce
