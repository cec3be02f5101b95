#include "commerce/agent/inventory.hpp"

#include <fstream>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce::agent {

Inventory::Inventory(std::shared_ptr<const Embedder> embedder) : embedder_(std::move(embedder)) {
  install(Catalog::from_products({}));
}

std::shared_ptr<const Inventory::Snapshot> Inventory::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

void Inventory::install(CatalogHandle catalog, const std::string& index_path) {
  auto index = std::make_shared<const VectorIndex>(
      index_path.empty() ? build_vector_index(*catalog, *embedder_)
                         : load_vector_index(index_path, *catalog, *embedder_));
  auto next = std::make_shared<const Snapshot>(Snapshot{std::move(catalog), std::move(index)});
  std::lock_guard lock(mu_);
  current_ = std::move(next);
}

IngestReport Inventory::ingest_file(const std::string& path, const IngestOptions& options) {
  auto result = ingest_catalog_file(path, options);
  install(result.catalog);
  return result.report;
}

IngestReport Inventory::ingest_stream(std::istream& source, const IngestOptions& options) {
  auto result = ingest_catalog(source, options);
  install(result.catalog);
  return result.report;
}

void ProfileStore::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read profiles " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      put(user_profile_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::kParse, path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void ProfileStore::put(UserProfile profile) {
  std::lock_guard lock(mu_);
  std::string id = profile.user_id;
  profiles_[id] = std::move(profile);
}

std::optional<UserProfile> ProfileStore::get(const std::string& user_id) const {
  std::lock_guard lock(mu_);
  auto it = profiles_.find(user_id);
  if (it == profiles_.end()) return std::nullopt;
  return it->second;
}

std::size_t ProfileStore::size() const {
  std::lock_guard lock(mu_);
  return profiles_.size();
}

}  // namespace commerce::agent
