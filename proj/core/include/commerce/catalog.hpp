#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace commerce {

struct Price {
  double amount = 0.0;
  std::string currency = "USD";

  bool operator==(const Price&) const = default;
};

struct Product {
  std::string id;
  std::string title;
  std::string description;
  std::string category;  // canonical lowercase path, e.g. "electronics/power-banks"
  std::string brand;
  Price price;
  std::map<std::string, std::string> attributes;  // normalized name -> normalized value
  bool in_stock = true;

  bool operator==(const Product&) const = default;
};

nlohmann::json to_json(const Product& product);

struct FilterConstraints {
  std::optional<std::string> category_prefix;
  std::vector<std::pair<std::string, std::string>> attribute_equals;
  std::optional<double> price_min;
  std::optional<double> price_max;
  bool in_stock_only = true;

  bool operator==(const FilterConstraints&) const = default;

  // Throws Error(kInvalidArgument) when price_min > price_max.
  void validate() const;
  // True when no field restricts the candidate set (in_stock_only counts).
  bool unconstrained() const;
};

nlohmann::json to_json(const FilterConstraints& constraints);
FilterConstraints filter_constraints_from_json(const nlohmann::json& json);

// Fields set in `newer` replace those in `older`; attribute_equals entries replace
// same-name entries. in_stock_only is taken from `newer`.
FilterConstraints merge_newest_wins(const FilterConstraints& older, const FilterConstraints& newer);

// Immutable product table plus the attribute/category postings used by
// filter_products. Build through ingest_catalog or Catalog::from_products.
class Catalog {
 public:
  // Products must already be normalized and satisfy their invariants; duplicate ids
  // keep the first occurrence.
  static std::shared_ptr<const Catalog> from_products(std::vector<Product> products);

  std::uint64_t generation() const noexcept { return generation_; }
  std::size_t size() const noexcept { return products_.size(); }
  bool empty() const noexcept { return products_.empty(); }

  // Ids are case-sensitive; returns nullptr for unknown ids.
  const Product* find(const std::string& id) const;

  // Ordered by id.
  const std::map<std::string, Product>& products() const noexcept { return products_; }

  const std::vector<std::string>* ids_with_category_prefix(const std::string& prefix) const;
  const std::vector<std::string>* ids_with_attribute(const std::string& name,
                                                     const std::string& value) const;
  const std::vector<std::string>& all_ids() const noexcept { return all_ids_; }

 private:
  Catalog() = default;

  std::uint64_t generation_ = 0;
  std::map<std::string, Product> products_;
  std::vector<std::string> all_ids_;
  std::unordered_map<std::string, std::vector<std::string>> by_category_prefix_;
  std::unordered_map<std::string, std::vector<std::string>> by_attribute_;
};

using CatalogHandle = std::shared_ptr<const Catalog>;

struct IngestRejection {
  std::size_t line = 0;  // 1-based physical line number
  std::string reason;

  bool operator==(const IngestRejection&) const = default;
};

struct IngestReport {
  std::size_t accepted = 0;
  std::vector<IngestRejection> rejected;
};

struct IngestOptions {
  // Unknown keys reject the line unless this is set.
  bool ignore_unknown_keys = false;
};

struct IngestResult {
  CatalogHandle catalog;
  IngestReport report;
};

// Parses one Catalog File Format record into a normalized Product. Throws Error
// (kParse) with the rejection reason.
Product parse_product_record(const nlohmann::json& record, const IngestOptions& options = {});

IngestResult ingest_catalog(std::istream& source, const IngestOptions& options = {});
// Throws Error(kIo) when the file cannot be opened.
IngestResult ingest_catalog_file(const std::string& path, const IngestOptions& options = {});

// Sorted ids of the products satisfying every constraint.
std::vector<std::string> filter_products(const Catalog& catalog, const FilterConstraints& constraints);

bool satisfies(const Product& product, const FilterConstraints& constraints);

// Absent (nullopt) for unknown ids.
std::optional<Product> lookup(const Catalog& catalog, const std::string& id);

}  // namespace commerce
