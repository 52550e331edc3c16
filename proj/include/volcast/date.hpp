#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace volcast {

/// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::int32_t days_since_epoch) : days_(days_since_epoch) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Parses `YYYY-MM-DD`; throws std::invalid_argument on malformed input.
  static Date parse(std::string_view text);

  [[nodiscard]] constexpr std::int32_t days() const { return days_; }
  [[nodiscard]] std::chrono::year_month_day ymd() const;
  /// 0 = Sunday ... 6 = Saturday.
  [[nodiscard]] unsigned weekday() const;
  [[nodiscard]] bool is_weekend() const {
    const unsigned wd = weekday();
    return wd == 0 || wd == 6;
  }
  [[nodiscard]] std::string to_string() const;

  constexpr Date operator+(int n) const { return Date(days_ + n); }
  constexpr Date operator-(int n) const { return Date(days_ - n); }
  constexpr int operator-(Date other) const { return days_ - other.days_; }
  constexpr auto operator<=>(const Date&) const = default;

 private:
  std::int32_t days_ = 0;
};

/// Date plus minute-of-day in exchange-local time.
struct DateTime {
  Date date;
  int minute = 0;

  /// Parses `YYYY-MM-DD HH:MM` or `YYYY-MM-DDTHH:MM`.
  static DateTime parse(std::string_view text);
  constexpr auto operator<=>(const DateTime&) const = default;
};

/// Parses `HH:MM` into minutes after midnight.
int parse_clock(std::string_view text);

}  // namespace volcast
