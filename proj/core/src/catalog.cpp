#include "commerce/catalog.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>

#include "commerce/errors.hpp"
#include "commerce/text.hpp"

namespace commerce {
namespace {

std::atomic<std::uint64_t> g_next_generation{1};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> kKeys = {"id",       "title",      "description",
                                              "category", "brand",      "price",
                                              "currency", "attributes", "in_stock"};
  return kKeys;
}

[[noreturn]] void reject(const std::string& reason) { throw Error(ErrorCode::kParse, reason); }

std::string required_string(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end()) reject(std::string("missing field '") + key + "'");
  if (!it->is_string()) reject(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string optional_string(const nlohmann::json& record, const char* key) {
  auto it = record.find(key);
  if (it == record.end() || it->is_null()) return {};
  if (!it->is_string()) reject(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

double parse_price(const nlohmann::json& record) {
  auto it = record.find("price");
  if (it == record.end()) reject("missing field 'price'");
  double amount = 0;
  if (it->is_number()) {
    amount = it->get<double>();
  } else if (it->is_string()) {
    // Decimal strings are tolerated; the canonical form is a JSON number.
    auto parsed = text::parse_amount(it->get<std::string>());
    if (!parsed) reject("field 'price' is not a decimal");
    amount = *parsed;
  } else {
    reject("field 'price' must be a number");
  }
  if (!std::isfinite(amount)) reject("non-finite price");
  if (amount < 0) reject("negative price");
  return amount;
}

std::string attribute_value_string(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return text::format_number(value.get<double>());
  if (value.is_boolean()) return value.get<bool>() ? "true" : "false";
  reject("attribute values must be strings or numbers");
}

void insert_sorted_unique(std::vector<std::string>& ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
}

std::string attribute_posting_key(const std::string& name, const std::string& value) {
  return name + '\x1f' + value;
}

}  // namespace

nlohmann::json to_json(const Product& product) {
  return {{"id", product.id},
          {"title", product.title},
          {"description", product.description},
          {"category", product.category},
          {"brand", product.brand},
          {"price", product.price.amount},
          {"currency", product.price.currency},
          {"attributes", product.attributes},
          {"in_stock", product.in_stock}};
}

void FilterConstraints::validate() const {
  if (price_min && price_max && *price_min > *price_max) {
    throw Error(ErrorCode::kInvalidArgument, "price_min must not exceed price_max");
  }
}

bool FilterConstraints::unconstrained() const {
  return !category_prefix && attribute_equals.empty() && !price_min && !price_max &&
         !in_stock_only;
}

nlohmann::json to_json(const FilterConstraints& constraints) {
  nlohmann::json out = nlohmann::json::object();
  if (constraints.category_prefix) out["category_prefix"] = *constraints.category_prefix;
  if (!constraints.attribute_equals.empty()) {
    out["attribute_equals"] = nlohmann::json::array();
    for (const auto& [name, value] : constraints.attribute_equals) {
      out["attribute_equals"].push_back({{"name", name}, {"value", value}});
    }
  }
  if (constraints.price_min) out["price_min"] = *constraints.price_min;
  if (constraints.price_max) out["price_max"] = *constraints.price_max;
  out["in_stock_only"] = constraints.in_stock_only;
  return out;
}

FilterConstraints filter_constraints_from_json(const nlohmann::json& json) {
  FilterConstraints out;
  if (!json.is_object()) return out;
  if (auto it = json.find("category_prefix"); it != json.end() && it->is_string()) {
    out.category_prefix = it->get<std::string>();
  }
  if (auto it = json.find("attribute_equals"); it != json.end() && it->is_array()) {
    for (const auto& pair : *it) {
      out.attribute_equals.emplace_back(pair.value("name", ""), pair.value("value", ""));
    }
  }
  if (auto it = json.find("price_min"); it != json.end() && it->is_number()) {
    out.price_min = it->get<double>();
  }
  if (auto it = json.find("price_max"); it != json.end() && it->is_number()) {
    out.price_max = it->get<double>();
  }
  out.in_stock_only = json.value("in_stock_only", true);
  return out;
}

FilterConstraints merge_newest_wins(const FilterConstraints& older, const FilterConstraints& newer) {
  FilterConstraints merged = older;
  if (newer.category_prefix) merged.category_prefix = newer.category_prefix;
  if (newer.price_min) merged.price_min = newer.price_min;
  if (newer.price_max) merged.price_max = newer.price_max;
  for (const auto& [name, value] : newer.attribute_equals) {
    std::erase_if(merged.attribute_equals, [&](const auto& p) { return p.first == name; });
    merged.attribute_equals.emplace_back(name, value);
  }
  merged.in_stock_only = newer.in_stock_only;
  // A newer bound can contradict an older one on the other side; the newer wins.
  if (merged.price_min && merged.price_max && *merged.price_min > *merged.price_max) {
    if (newer.price_max) {
      merged.price_min.reset();
    } else {
      merged.price_max.reset();
    }
  }
  return merged;
}

std::shared_ptr<const Catalog> Catalog::from_products(std::vector<Product> products) {
  std::shared_ptr<Catalog> catalog(new Catalog());
  catalog->generation_ = g_next_generation.fetch_add(1);
  for (auto& product : products) {
    auto id = product.id;
    catalog->products_.emplace(std::move(id), std::move(product));
  }
  catalog->all_ids_.reserve(catalog->products_.size());
  for (const auto& [id, product] : catalog->products_) {
    catalog->all_ids_.push_back(id);
    std::string prefix;
    for (const auto& segment : text::split_category(product.category)) {
      if (!prefix.empty()) prefix += '/';
      prefix += segment;
      catalog->by_category_prefix_[prefix].push_back(id);
    }
    for (const auto& [name, value] : product.attributes) {
      catalog->by_attribute_[attribute_posting_key(name, value)].push_back(id);
    }
  }
  // Ids are inserted in map order, so postings are already sorted; keep them unique.
  for (auto& [key, ids] : catalog->by_category_prefix_) insert_sorted_unique(ids);
  for (auto& [key, ids] : catalog->by_attribute_) insert_sorted_unique(ids);
  return catalog;
}

const Product* Catalog::find(const std::string& id) const {
  auto it = products_.find(id);
  return it == products_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* Catalog::ids_with_category_prefix(const std::string& prefix) const {
  auto it = by_category_prefix_.find(prefix);
  return it == by_category_prefix_.end() ? nullptr : &it->second;
}

const std::vector<std::string>* Catalog::ids_with_attribute(const std::string& name,
                                                            const std::string& value) const {
  auto it = by_attribute_.find(attribute_posting_key(name, value));
  return it == by_attribute_.end() ? nullptr : &it->second;
}

Product parse_product_record(const nlohmann::json& record, const IngestOptions& options) {
  if (!record.is_object()) reject("record is not a JSON object");
  if (!options.ignore_unknown_keys) {
    for (const auto& [key, value] : record.items()) {
      if (!known_keys().contains(key)) reject("unknown key '" + key + "'");
    }
  }

  Product product;
  product.id = required_string(record, "id");
  if (product.id.empty()) reject("empty id");
  product.title = required_string(record, "title");
  product.description = optional_string(record, "description");
  product.category = text::normalize_category(required_string(record, "category"));
  if (product.category.empty()) reject("empty category");
  product.brand = text::trim(optional_string(record, "brand"));
  product.price.amount = parse_price(record);

  std::string currency = text::trim(required_string(record, "currency"));
  if (currency.size() != 3 || !std::all_of(currency.begin(), currency.end(), [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z');
      })) {
    reject("invalid currency code");
  }
  std::transform(currency.begin(), currency.end(), currency.begin(),
                 [](char c) { return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 32) : c; });
  product.price.currency = currency;

  if (auto it = record.find("attributes"); it != record.end() && !it->is_null()) {
    if (!it->is_object()) reject("field 'attributes' must be an object");
    for (const auto& [raw_name, raw_value] : it->items()) {
      std::string name = text::normalize_key(raw_name);
      if (name.empty()) reject("empty attribute name");
      product.attributes[name] = text::normalize_key(attribute_value_string(raw_value));
    }
  }

  if (auto it = record.find("in_stock"); it != record.end() && !it->is_null()) {
    if (!it->is_boolean()) reject("field 'in_stock' must be a boolean");
    product.in_stock = it->get<bool>();
  }
  return product;
}

IngestResult ingest_catalog(std::istream& source, const IngestOptions& options) {
  IngestReport report;
  std::vector<Product> products;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(source, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;

    auto record = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (record.is_discarded()) {
      report.rejected.push_back({line_number, "invalid json"});
      continue;
    }
    try {
      Product product = parse_product_record(record, options);
      if (!seen.insert(product.id).second) {
        report.rejected.push_back({line_number, "duplicate id '" + product.id + "'"});
        continue;
      }
      products.push_back(std::move(product));
    } catch (const Error& e) {
      report.rejected.push_back({line_number, e.what()});
    }
  }
  if (source.bad()) throw Error(ErrorCode::kIo, "catalog source read failed");
  report.accepted = products.size();
  return {Catalog::from_products(std::move(products)), std::move(report)};
}

IngestResult ingest_catalog_file(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open catalog file: " + path);
  return ingest_catalog(in, options);
}

bool satisfies(const Product& product, const FilterConstraints& constraints) {
  if (constraints.in_stock_only && !product.in_stock) return false;
  if (constraints.price_min && product.price.amount < *constraints.price_min) return false;
  if (constraints.price_max && product.price.amount > *constraints.price_max) return false;
  if (constraints.category_prefix &&
      !text::category_has_prefix(product.category,
                                 text::normalize_category(*constraints.category_prefix))) {
    return false;
  }
  for (const auto& [name, value] : constraints.attribute_equals) {
    auto it = product.attributes.find(text::normalize_key(name));
    if (it == product.attributes.end() || it->second != text::normalize_key(value)) return false;
  }
  return true;
}

std::vector<std::string> filter_products(const Catalog& catalog, const FilterConstraints& constraints) {
  if (constraints.price_min && constraints.price_max &&
      *constraints.price_min > *constraints.price_max) {
    return {};
  }

  // Intersect the postings of every indexed constraint, smallest first.
  std::vector<const std::vector<std::string>*> postings;
  static const std::vector<std::string> kEmpty;
  if (constraints.category_prefix) {
    std::string prefix = text::normalize_category(*constraints.category_prefix);
    if (!prefix.empty()) {
      const auto* ids = catalog.ids_with_category_prefix(prefix);
      postings.push_back(ids ? ids : &kEmpty);
    }
  }
  for (const auto& [name, value] : constraints.attribute_equals) {
    const auto* ids =
        catalog.ids_with_attribute(text::normalize_key(name), text::normalize_key(value));
    postings.push_back(ids ? ids : &kEmpty);
  }
  std::sort(postings.begin(), postings.end(),
            [](const auto* a, const auto* b) { return a->size() < b->size(); });

  std::vector<std::string> candidates =
      postings.empty() ? catalog.all_ids() : *postings.front();
  for (std::size_t i = 1; i < postings.size() && !candidates.empty(); ++i) {
    std::vector<std::string> narrowed;
    std::set_intersection(candidates.begin(), candidates.end(), postings[i]->begin(),
                          postings[i]->end(), std::back_inserter(narrowed));
    candidates = std::move(narrowed);
  }

  std::vector<std::string> out;
  out.reserve(candidates.size());
  for (const auto& id : candidates) {
    const Product& product = *catalog.find(id);
    if (constraints.in_stock_only && !product.in_stock) continue;
    if (constraints.price_min && product.price.amount < *constraints.price_min) continue;
    if (constraints.price_max && product.price.amount > *constraints.price_max) continue;
    out.push_back(id);
  }
  return out;
}

std::optional<Product> lookup(const Catalog& catalog, const std::string& id) {
  if (const Product* product = catalog.find(id)) return *product;
  return std::nullopt;
}

}  // namespace commerce
