#include "commerce/text.hpp"

#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <array>
#include <charconv>
#include <cmath>
#include <random>

#include "commerce/errors.hpp"

namespace commerce::text {

std::string normalize_key(std::string_view input) {
  icu::UnicodeString source = icu::UnicodeString::fromUTF8(
      icu::StringPiece(input.data(), static_cast<int32_t>(input.size())));
  source.toLower(icu::Locale::getRoot());

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInternal, "ICU NFC normalizer unavailable");
  }
  icu::UnicodeString normalized = nfc->normalize(source, status);
  if (U_FAILURE(status)) {
    throw Error(ErrorCode::kInternal, "ICU normalization failed");
  }

  icu::UnicodeString collapsed;
  bool pending_space = false;
  for (int32_t i = 0; i < normalized.length();) {
    UChar32 cp = normalized.char32At(i);
    i += U16_LENGTH(cp);
    if (u_isUWhiteSpace(cp)) {
      pending_space = !collapsed.isEmpty();
      continue;
    }
    if (pending_space) {
      collapsed.append(static_cast<UChar>(' '));
      pending_space = false;
    }
    collapsed.append(cp);
  }
  std::string out;
  collapsed.toUTF8String(out);
  return out;
}

std::vector<std::string> split_category(std::string_view category) {
  std::vector<std::string> segments;
  std::size_t start = 0;
  while (start <= category.size()) {
    std::size_t slash = category.find('/', start);
    if (slash == std::string_view::npos) slash = category.size();
    std::string segment = normalize_key(category.substr(start, slash - start));
    if (!segment.empty()) segments.push_back(std::move(segment));
    start = slash + 1;
  }
  return segments;
}

std::string normalize_category(std::string_view input) {
  std::string out;
  for (const auto& segment : split_category(input)) {
    if (!out.empty()) out += '/';
    out += segment;
  }
  return out;
}

bool category_has_prefix(std::string_view category, std::string_view prefix) {
  if (prefix.empty()) return true;
  if (category.size() < prefix.size()) return false;
  if (category.substr(0, prefix.size()) != prefix) return false;
  return category.size() == prefix.size() || category[prefix.size()] == '/';
}

std::string trim(std::string_view input) {
  constexpr std::string_view kSpace = " \t\r\n\f\v";
  auto begin = input.find_first_not_of(kSpace);
  if (begin == std::string_view::npos) return {};
  auto end = input.find_last_not_of(kSpace);
  return std::string(input.substr(begin, end - begin + 1));
}

std::string ascii_lower(std::string_view input) {
  std::string out(input);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string format_number(double value) {
  if (std::isfinite(value) && value == std::floor(value) && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

std::optional<double> parse_amount(std::string_view input) {
  std::string digits;
  bool seen_digit = false;
  for (char c : input) {
    if (c >= '0' && c <= '9') {
      digits += c;
      seen_digit = true;
    } else if (c == '.' || (c == '-' && digits.empty())) {
      digits += c;
    } else if (c == ',' || c == '$' || c == ' ') {
      continue;
    } else if (seen_digit) {
      break;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

std::string random_token() {
  std::random_device device;
  std::uint64_t hi = (static_cast<std::uint64_t>(device()) << 32) | device();
  std::uint64_t lo = (static_cast<std::uint64_t>(device()) << 32) | device();
  return hex64(hi) + hex64(lo);
}

}  // namespace commerce::text
