#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace opdrift {

// A calendar month. Months are totally ordered and support month arithmetic,
// which is all the time handling the pipelines need.
struct Month {
  int year = 1970;
  int month = 1;  // 1..12

  // Months since year 0; contiguous across year boundaries.
  int index() const noexcept { return year * 12 + (month - 1); }
  static Month from_index(int index) noexcept;

  Month operator+(int months) const noexcept { return from_index(index() + months); }
  Month operator-(int months) const noexcept { return from_index(index() - months); }
  friend int operator-(Month a, Month b) noexcept { return a.index() - b.index(); }

  friend auto operator<=>(const Month&, const Month&) = default;

  // "YYYY-MM"
  std::string label() const;
  // Accepts "YYYY-MM"; throws InputError otherwise.
  static Month parse(std::string_view text);
};

using Date = std::chrono::year_month_day;

// Strict ISO-8601 calendar date "YYYY-MM-DD"; throws InputError on anything else,
// including impossible dates such as 2021-02-30.
Date parse_date(std::string_view text);
std::string format_date(const Date& date);
Month month_of(const Date& date) noexcept;
int days_in_month(Month m) noexcept;

}  // namespace opdrift
