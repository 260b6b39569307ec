#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace covihawkes {

/// Calendar date backed by a day count since the civil epoch. Supports the
/// arithmetic the daily series need: offsets, differences, and weekday lookup.
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);

    /// Parses "YYYY-MM-DD". Throws std::invalid_argument on malformed input
    /// or an impossible calendar date.
    static Date parse_iso(std::string_view text);

    std::string to_iso() const;

    Date plus_days(int n) const;

    /// Weekday in 1..7 with 1 = Sunday.
    int weekday1() const;

    int year() const;
    unsigned month() const;
    unsigned day() const;

    friend int operator-(const Date& a, const Date& b) {
        return static_cast<int>((a.days_ - b.days_).count());
    }
    friend Date operator+(const Date& a, int n) { return a.plus_days(n); }
    auto operator<=>(const Date&) const = default;

private:
    std::chrono::sys_days days_{};
};

}  // namespace covihawkes
