#include "volcast/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace volcast {

namespace {

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) {
    throw std::invalid_argument("malformed " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) {
    throw std::invalid_argument("invalid calendar date");
  }
  return Date(static_cast<std::int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
}

Date Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw std::invalid_argument("malformed date (want YYYY-MM-DD): '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), "year");
  const int m = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  if (m < 1 || m > 12 || d < 1 || d > 31) {
    throw std::invalid_argument("invalid date: '" + std::string(text) + "'");
  }
  return from_ymd(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

std::chrono::year_month_day Date::ymd() const {
  return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
}

unsigned Date::weekday() const {
  return std::chrono::weekday{std::chrono::sys_days{std::chrono::days{days_}}}.c_encoding();
}

std::string Date::to_string() const {
  const auto v = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
  return buf;
}

int parse_clock(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw std::invalid_argument("malformed time (want HH:MM): '" + std::string(text) + "'");
  }
  const int h = parse_int(text.substr(0, colon), "hour");
  const int m = parse_int(text.substr(colon + 1, 2), "minute");
  if (h < 0 || h > 23 || m < 0 || m > 59) {
    throw std::invalid_argument("invalid time: '" + std::string(text) + "'");
  }
  return h * 60 + m;
}

DateTime DateTime::parse(std::string_view text) {
  if (text.size() < 16 || (text[10] != ' ' && text[10] != 'T')) {
    throw std::invalid_argument("malformed datetime (want YYYY-MM-DD HH:MM): '" +
                                std::string(text) + "'");
  }
  return DateTime{Date::parse(text.substr(0, 10)), parse_clock(text.substr(11, 5))};
}

}  // namespace volcast
