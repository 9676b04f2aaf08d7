#include "aetrace/dates.hpp"

#include <cstdio>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (c < '0' || c > '9') return false;
    return true;
}

std::optional<Date> make_checked(int y, unsigned m, unsigned d) {
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date{y, m, d};
}

} // namespace

Date::Date(int year, unsigned month, unsigned day)
    : days_(std::chrono::sys_days{std::chrono::year_month_day{
          std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}}}) {}

std::optional<Date> Date::parse(std::string_view text) {
    std::string t = trim(text);
    // ISO 8601: YYYY-MM-DD
    if (t.size() == 10 && t[4] == '-' && t[7] == '-') {
        auto y = t.substr(0, 4), m = t.substr(5, 2), d = t.substr(8, 2);
        if (all_digits(y) && all_digits(m) && all_digits(d))
            return make_checked(std::stoi(y), unsigned(std::stoi(m)), unsigned(std::stoi(d)));
    }
    // register pages also use DD/MM/YYYY
    if (t.size() == 10 && t[2] == '/' && t[5] == '/') {
        auto d = t.substr(0, 2), m = t.substr(3, 2), y = t.substr(6, 4);
        if (all_digits(y) && all_digits(m) && all_digits(d))
            return make_checked(std::stoi(y), unsigned(std::stoi(m)), unsigned(std::stoi(d)));
    }
    return std::nullopt;
}

Date Date::parse_or_throw(std::string_view text) {
    auto d = parse(text);
    if (!d) throw ParseError("unparseable date: '" + std::string(text) + "'");
    return *d;
}

int Date::year() const {
    return int(std::chrono::year_month_day{days_}.year());
}

std::string Date::to_iso() const {
    std::chrono::year_month_day ymd{days_};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", int(ymd.year()),
                  unsigned(ymd.month()), unsigned(ymd.day()));
    return buf;
}

long Date::days_until(const Date& later) const {
    return (later.days_ - days_).count();
}

Date Date::plus_days(long n) const {
    Date out;
    out.days_ = days_ + std::chrono::days{n};
    return out;
}

} // namespace aetrace
