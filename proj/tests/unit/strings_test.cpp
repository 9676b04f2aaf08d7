#include "aetrace/strings.hpp"

#include <doctest.h>

using namespace aetrace;

TEST_CASE("strings: trim removes surrounding whitespace only") {
    CHECK(trim("  hello  ") == "hello");
    CHECK(trim("\t\r\n x \n") == "x");
    CHECK(trim("a b") == "a b");
    CHECK(trim("") == "");
    CHECK(trim("   ") == "");
}

TEST_CASE("strings: case conversions") {
    CHECK(to_lower("AbC-12") == "abc-12");
    CHECK(to_upper("n02ba01") == "N02BA01");
    CHECK(to_lower("") == "");
}

TEST_CASE("strings: norm_key lowers and trims") {
    CHECK(norm_key("  Pyrexia ") == "pyrexia");
    CHECK(norm_key("HEADACHE") == "headache");
    // Only the ends are trimmed; interior spacing carries meaning.
    CHECK(norm_key("Dry  mouth") == "dry  mouth");
}

TEST_CASE("strings: icase comparisons") {
    CHECK(equals_icase("Alpharix", "ALPHARIX"));
    CHECK_FALSE(equals_icase("Alpharix", "Alpharix "));
    CHECK(starts_with_icase("4.8 Undesirable effects", "4.8 UNDES"));
    CHECK_FALSE(starts_with_icase("4.8", "4.8 Undesirable"));
}

TEST_CASE("strings: split keeps empty fields") {
    CHECK(split("a$b$c", '$') == std::vector<std::string>{"a", "b", "c"});
    CHECK(split("a$$c", '$') == std::vector<std::string>{"a", "", "c"});
    CHECK(split("", '$') == std::vector<std::string>{""});
}

TEST_CASE("strings: collapse_ws folds runs and trims") {
    CHECK(collapse_ws("  a \t\n b  ") == "a b");
    CHECK(collapse_ws("one two") == "one two");
    CHECK(collapse_ws("\n\n") == "");
}

TEST_CASE("strings: join") {
    CHECK(join({"a", "b", "c"}, ", ") == "a, b, c");
    CHECK(join({}, ",") == "");
    CHECK(join({"solo"}, ",") == "solo");
}
