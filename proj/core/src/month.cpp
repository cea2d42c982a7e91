#include "opdrift/month.hpp"

#include <charconv>
#include <cstdio>

#include "opdrift/error.hpp"

namespace opdrift {

namespace {

bool parse_fixed_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace

Month Month::from_index(int index) noexcept {
  int year = index >= 0 ? index / 12 : -((-index + 11) / 12);
  return Month{year, index - year * 12 + 1};
}

std::string Month::label() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
  return buf;
}

Month Month::parse(std::string_view text) {
  int y = 0;
  int m = 0;
  if (text.size() != 7 || text[4] != '-' || !parse_fixed_int(text.substr(0, 4), y) ||
      !parse_fixed_int(text.substr(5, 2), m) || m < 1 || m > 12) {
    throw InputError("invalid month '" + std::string(text) + "' (expected YYYY-MM)");
  }
  return Month{y, m};
}

Date parse_date(std::string_view text) {
  int y = 0;
  int m = 0;
  int d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-' || !parse_fixed_int(text.substr(0, 4), y) ||
      !parse_fixed_int(text.substr(5, 2), m) || !parse_fixed_int(text.substr(8, 2), d)) {
    throw InputError("invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw InputError("invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

Month month_of(const Date& date) noexcept {
  return Month{static_cast<int>(date.year()), static_cast<int>(static_cast<unsigned>(date.month()))};
}

int days_in_month(Month m) noexcept {
  using namespace std::chrono;
  year_month_day_last last{year{m.year}, month_day_last{month{static_cast<unsigned>(m.month)}}};
  return static_cast<int>(static_cast<unsigned>(last.day()));
}

}  // namespace opdrift
