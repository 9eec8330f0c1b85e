#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace trendlab {

/// Calendar date without time of day. Stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  explicit constexpr Date(std::chrono::sys_days days) : days_(days) {}
  Date(int year, unsigned month, unsigned day);

  /// Parses ISO-8601 `YYYY-MM-DD`; throws DataError on malformed or invalid dates.
  static Date parse(std::string_view text);

  std::string iso() const;
  std::chrono::sys_days days() const { return days_; }
  long serial() const { return static_cast<long>(days_.time_since_epoch().count()); }

  /// Monday of the ISO week containing this date.
  Date week_start() const;

  Date operator+(int n) const { return Date(days_ + std::chrono::days(n)); }
  friend long operator-(Date a, Date b) { return a.serial() - b.serial(); }
  friend constexpr auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace trendlab
