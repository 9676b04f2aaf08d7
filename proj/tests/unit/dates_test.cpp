#include "aetrace/dates.hpp"

#include <doctest.h>

#include "aetrace/errors.hpp"

using namespace aetrace;

TEST_CASE("dates: ISO and DD/MM/YYYY forms parse to the same day") {
    auto iso = Date::parse("2014-07-01");
    auto eu = Date::parse("01/07/2014");
    REQUIRE(iso.has_value());
    REQUIRE(eu.has_value());
    CHECK(*iso == *eu);
    CHECK(iso->to_iso() == "2014-07-01");
    CHECK(iso->year() == 2014);
}

TEST_CASE("dates: invalid inputs are rejected") {
    CHECK_FALSE(Date::parse("").has_value());
    CHECK_FALSE(Date::parse("2014-13-01").has_value());
    CHECK_FALSE(Date::parse("2014-02-30").has_value());
    CHECK_FALSE(Date::parse("31/02/2014").has_value());
    CHECK_FALSE(Date::parse("not a date").has_value());
    CHECK_FALSE(Date::parse("2014/07/01").has_value());
    CHECK_THROWS_AS(Date::parse_or_throw("nope"), ParseError);
}

TEST_CASE("dates: leap day only in leap years") {
    CHECK(Date::parse("2016-02-29").has_value());
    CHECK_FALSE(Date::parse("2015-02-29").has_value());
    CHECK(Date::parse("2000-02-29").has_value());
    CHECK_FALSE(Date::parse("1900-02-29").has_value());
}

TEST_CASE("dates: arithmetic and ordering are exact") {
    Date a = Date::parse_or_throw("2012-03-15");
    Date b = Date::parse_or_throw("2014-07-01");
    CHECK(a.days_until(b) == 838);
    CHECK(b.days_until(a) == -838);
    CHECK(a.plus_days(838) == b);
    CHECK(a < b);
    CHECK(a == Date::parse_or_throw("15/03/2012"));
}

TEST_CASE("dates: round trip across a year boundary") {
    Date d = Date::parse_or_throw("1999-12-31");
    CHECK(d.plus_days(1).to_iso() == "2000-01-01");
    CHECK(d.plus_days(1).year() == 2000);
}
