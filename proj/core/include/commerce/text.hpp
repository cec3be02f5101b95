#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Text helpers shared by every module: Unicode normalization of catalog keys,
// the FNV-1a hash used for feature hashing and ids, and number formatting.
namespace commerce::text {

// Unicode NFC, lowercase, trimmed, inner whitespace runs collapsed to one space.
// Used for attribute names/values, brands as lookup keys, and free-text categories.
std::string normalize_key(std::string_view input);

// Canonical lowercase category path: each '/'-separated segment normalized with
// normalize_key, empty segments dropped. "Electronics / Power Banks" ->
// "electronics/power banks".
std::string normalize_category(std::string_view input);

std::vector<std::string> split_category(std::string_view category);

// True when `prefix` matches `category` on whole path segments.
bool category_has_prefix(std::string_view category, std::string_view prefix);

std::string trim(std::string_view input);
std::string ascii_lower(std::string_view input);

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = kFnvOffset;
  for (char c : bytes) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= kFnvPrime;
  }
  return hash;
}

std::string hex64(std::uint64_t value);

// Shortest round-trip decimal rendering; integral values have no fraction ("100").
std::string format_number(double value);

// Parses a plain decimal ("100", "99.5", "$1,299.00"). Currency symbols and thousands
// separators are ignored.
std::optional<double> parse_amount(std::string_view input);

// 128 bits from the OS entropy source, hex encoded.
std::string random_token();

}  // namespace commerce::text
