#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace aetrace {

// Calendar date. Internally a day count so arithmetic and ordering are exact.
class Date {
public:
    Date() = default;
    Date(int year, unsigned month, unsigned day);

    static std::optional<Date> parse(std::string_view text); // ISO or DD/MM/YYYY
    static Date parse_or_throw(std::string_view text);

    int year() const;
    std::string to_iso() const; // YYYY-MM-DD

    long days_until(const Date& later) const;
    Date plus_days(long n) const;

    auto operator<=>(const Date&) const = default;

private:
    explicit Date(std::chrono::sys_days d) : days_(d) {}
    std::chrono::sys_days days_{};
};

} // namespace aetrace
