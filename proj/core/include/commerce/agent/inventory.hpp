#pragma once

#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "commerce/catalog.hpp"
#include "commerce/embeddings.hpp"
#include "commerce/personalization.hpp"

namespace commerce::agent {

// The catalog and its vector index, swapped together. Readers take a snapshot and
// keep using it even if an ingest replaces the live pair meanwhile.
class Inventory {
 public:
  struct Snapshot {
    CatalogHandle catalog;
    std::shared_ptr<const VectorIndex> index;
  };

  explicit Inventory(std::shared_ptr<const Embedder> embedder);

  std::shared_ptr<const Snapshot> snapshot() const;
  const Embedder& embedder() const { return *embedder_; }

  // Installs `catalog` with a freshly built index, or the index at `index_path` when
  // given (Error(kIndexMismatch) if it does not fit the catalog).
  void install(CatalogHandle catalog, const std::string& index_path = {});

  IngestReport ingest_file(const std::string& path, const IngestOptions& options = {});
  IngestReport ingest_stream(std::istream& source, const IngestOptions& options = {});

 private:
  std::shared_ptr<const Embedder> embedder_;
  mutable std::mutex mu_;
  std::shared_ptr<const Snapshot> current_;
};

// Shopper profiles keyed by user id.
class ProfileStore {
 public:
  // JSONL, one UserProfile document per line. Throws Error(kIo / kParse).
  void load_file(const std::string& path);
  void put(UserProfile profile);
  std::optional<UserProfile> get(const std::string& user_id) const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, UserProfile> profiles_;
};

}  // namespace commerce::agent
