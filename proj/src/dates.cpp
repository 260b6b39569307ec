#include "covihawkes/dates.hpp"

#include <cstdio>
#include <stdexcept>

namespace covihawkes {

namespace {

std::chrono::year_month_day to_ymd(std::chrono::sys_days days) {
    return std::chrono::year_month_day{days};
}

}  // namespace

Date::Date(int year, unsigned month, unsigned day) {
    const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                          std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    }
    days_ = std::chrono::sys_days{ymd};
}

Date Date::parse_iso(std::string_view text) {
    int y = 0;
    unsigned m = 0;
    unsigned d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-' ||
        std::sscanf(std::string(text).c_str(), "%d-%u-%u", &y, &m, &d) != 3) {
        throw std::invalid_argument("expected ISO date YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    return Date(y, m, d);
}

std::string Date::to_iso() const {
    const auto ymd = to_ymd(days_);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

Date Date::plus_days(int n) const {
    Date out;
    out.days_ = days_ + std::chrono::days{n};
    return out;
}

int Date::weekday1() const {
    // c_encoding: Sunday = 0.
    return static_cast<int>(std::chrono::weekday{days_}.c_encoding()) + 1;
}

int Date::year() const { return static_cast<int>(to_ymd(days_).year()); }
unsigned Date::month() const { return static_cast<unsigned>(to_ymd(days_).month()); }
unsigned Date::day() const { return static_cast<unsigned>(to_ymd(days_).day()); }

}  // namespace covihawkes
