#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace watertwin {

/// Calendar day stored as days since 1970-01-01.
class Date {
public:
    Date() = default;

    static Date from_days(std::int32_t d) { return Date(d); }

    static Date from_ymd(int year, unsigned month, unsigned day) {
        std::chrono::year_month_day ymd{std::chrono::year{year},
                                        std::chrono::month{month},
                                        std::chrono::day{day}};
        if (!ymd.ok())
            throw std::invalid_argument("invalid calendar date: " + std::to_string(year) +
                                        "-" + std::to_string(month) + "-" + std::to_string(day));
        return Date(std::chrono::sys_days{ymd}.time_since_epoch().count());
    }

    /// Strict ISO "YYYY-MM-DD".
    static Date parse(std::string_view s) {
        if (s.size() != 10 || s[4] != '-' || s[7] != '-')
            throw std::invalid_argument("expected YYYY-MM-DD date, got '" + std::string(s) + "'");
        auto digits = [&](std::size_t pos, std::size_t len) {
            int v = 0;
            for (std::size_t i = pos; i < pos + len; ++i) {
                if (s[i] < '0' || s[i] > '9')
                    throw std::invalid_argument("expected YYYY-MM-DD date, got '" + std::string(s) + "'");
                v = v * 10 + (s[i] - '0');
            }
            return v;
        };
        return from_ymd(digits(0, 4), static_cast<unsigned>(digits(5, 2)),
                        static_cast<unsigned>(digits(8, 2)));
    }

    std::int32_t days_since_epoch() const { return days_; }

    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day() const { return static_cast<unsigned>(ymd().day()); }

    /// Monday = 0 .. Sunday = 6.
    int day_of_week() const {
        std::chrono::weekday wd{sys_days()};
        return static_cast<int>(wd.iso_encoding()) - 1;
    }

    bool is_weekend() const { return day_of_week() >= 5; }

    Date plus_days(std::int32_t n) const { return Date(days_ + n); }

    /// First day of the calendar month.
    Date month_start() const {
        auto d = ymd();
        return Date(std::chrono::sys_days{d.year() / d.month() / std::chrono::day{1}}
                        .time_since_epoch()
                        .count());
    }

    /// Monday of the ISO week.
    Date week_start() const { return Date(days_ - day_of_week()); }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
        return buf;
    }

    friend std::int32_t operator-(Date a, Date b) { return a.days_ - b.days_; }
    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::int32_t d) : days_(d) {}

    std::chrono::sys_days sys_days() const {
        return std::chrono::sys_days{std::chrono::days{days_}};
    }
    std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{sys_days()}; }

    std::int32_t days_ = 0;
};

}  // namespace watertwin
