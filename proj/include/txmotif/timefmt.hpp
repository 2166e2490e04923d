#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace txmotif {

namespace detail {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

inline std::optional<int> read_int(std::string_view s, std::size_t pos, std::size_t len) {
  if (pos + len > s.size()) return std::nullopt;
  int v = 0;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

}  // namespace detail

// Parses a timestamp with at-least-second resolution. Accepts either epoch
// seconds (optionally signed integer) or RFC 3339, e.g.
// "2023-01-05T17:40:00Z", "2023-01-05 17:40:00+02:00". Fractional seconds are
// accepted and truncated. A missing offset is read as UTC.
inline std::optional<std::int64_t> parse_timestamp(std::string_view s) {
  using namespace detail;
  if (s.empty()) return std::nullopt;

  if (all_digits(s) || (s[0] == '-' && all_digits(s.substr(1)))) {
    try {
      return std::stoll(std::string(s));
    } catch (...) {
      return std::nullopt;
    }
  }

  auto year = read_int(s, 0, 4);
  if (!year || s.size() < 19 || s[4] != '-' || s[7] != '-') return std::nullopt;
  auto month = read_int(s, 5, 2);
  auto day = read_int(s, 8, 2);
  if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') return std::nullopt;
  auto hour = read_int(s, 11, 2);
  auto minute = read_int(s, 14, 2);
  auto second = read_int(s, 17, 2);
  if (!month || !day || !hour || !minute || !second) return std::nullopt;
  if (s[13] != ':' || s[16] != ':') return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31) return std::nullopt;
  if (*hour > 23 || *minute > 59 || *second > 60) return std::nullopt;

  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
      ++pos;
      ++digits;
    }
    if (digits == 0) return std::nullopt;
  }

  std::int64_t offset = 0;
  if (pos < s.size()) {
    char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      auto oh = read_int(s, pos + 1, 2);
      auto om = read_int(s, pos + 4, 2);
      if (!oh || !om || pos + 6 > s.size() || s[pos + 3] != ':') return std::nullopt;
      offset = (*oh * 3600 + *om * 60) * (c == '+' ? 1 : -1);
      pos += 6;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;

  const std::int64_t days = days_from_civil(*year, static_cast<unsigned>(*month),
                                            static_cast<unsigned>(*day));
  return days * 86400 + *hour * 3600 + *minute * 60 + *second - offset;
}

// Epoch seconds -> "YYYY-MM-DDThh:mm:ssZ".
inline std::string format_rfc3339(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>(rem % 3600 / 60), static_cast<long long>(rem % 60));
  return buf;
}

inline std::optional<bool> parse_bool_flag(std::string_view s) {
  if (s == "0" || s == "false" || s == "False" || s == "FALSE") return false;
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
  return std::nullopt;
}

// "90" (seconds), "45s", "30m", "6h", "2d".
inline std::optional<std::int64_t> parse_duration(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::int64_t mult = 1;
  switch (s.back()) {
    case 's': mult = 1; s.remove_suffix(1); break;
    case 'm': mult = 60; s.remove_suffix(1); break;
    case 'h': mult = 3600; s.remove_suffix(1); break;
    case 'd': mult = 86400; s.remove_suffix(1); break;
    default: break;
  }
  if (!detail::all_digits(s)) return std::nullopt;
  try {
    return std::stoll(std::string(s)) * mult;
  } catch (...) {
    return std::nullopt;
  }
}

}  // namespace txmotif
