#include <doctest.h>

#include <random>

#include "aetrace/errors.hpp"
#include "aetrace/register_index.hpp"

using namespace aetrace;

TEST_CASE("parse_eu_number accepts the EU/1/YY/NNN grammar") {
    auto n = parse_eu_number("EU/1/12/793");
    CHECK(n.year == 12);
    CHECK(n.nnn == 793);

    CHECK(parse_eu_number("EU/1/99/8").nnn == 8);
    CHECK(parse_eu_number("EU/1/05/007").nnn == 7); // leading zeros discarded
    CHECK(parse_eu_number("EU/1/20/1503").nnn == 1503);
    CHECK(parse_eu_number(" EU/1/12/793 ").nnn == 793); // surrounding blanks ignored
}

TEST_CASE("parse_eu_number rejects malformed numbers") {
    for (const char* bad : {"EU/2/12/793", "EU/1/XX/999", "EU/1/12/", "EU/1/12/12345",
                            "EU/1/123/45", "1/12/793", "", "EU/1/12/79a"}) {
        CHECK_THROWS_AS(parse_eu_number(bad), ParseError);
    }
}

TEST_CASE("build_product_url embeds the sequential number") {
    CHECK(build_product_url(793) ==
          "https://ec.europa.eu/health/documents/community-register/html/h793.htm");
    CHECK(build_product_url(8) ==
          "https://ec.europa.eu/health/documents/community-register/html/h8.htm");
}

TEST_CASE("eu number round-trips through formatting for 1000 random values") {
    std::mt19937 rng(20240101);
    std::uniform_int_distribution<int> year(0, 99);
    std::uniform_int_distribution<int> nnn(1, 9999);
    for (int i = 0; i < 1000; ++i) {
        int y = year(rng), n = nnn(rng);
        char buf[32];
        std::snprintf(buf, sizeof buf, "EU/1/%02d/%d", y, n);
        auto parsed = parse_eu_number(buf);
        CHECK(parsed.year == y);
        CHECK(parsed.nnn == n);
    }
}

TEST_CASE("brand index keeps CH rows below the third-row header") {
    std::vector<CsvRow> rows = {
        {"Union Register export", "", ""},
        {"banner line two", "", ""},
        {"Product Name", "Category", "EU Number"},
        {"Alpharix", "CH", "EU/1/12/793"},
        {"Vetodog", "CV", "EU/2/10/105"},
        {"Betazol", "CH", "EU/1/05/310"},
    };
    MemoryLog log;
    auto entries = parse_brand_index(rows, {}, log);
    REQUIRE(entries.size() == 2);
    CHECK(entries[0].brand_name == "Alpharix");
    CHECK(entries[0].h_number == 793);
    CHECK(entries[0].register_url == build_product_url(793));
    CHECK(entries[1].eu_number == "EU/1/05/310");
}

TEST_CASE("brand index warns on malformed EU numbers instead of failing") {
    std::vector<CsvRow> rows = {
        {"a", "", ""},
        {"b", "", ""},
        {"Product Name", "Category", "EU Number"},
        {"Goodone", "CH", "EU/1/19/1384"},
        {"Brokenmark", "CH", "EU/1/XX/999"},
    };
    MemoryLog log;
    auto entries = parse_brand_index(rows, {}, log);
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].brand_name == "Goodone");
    CHECK(log.count(LogLevel::Warning) == 1);
    CHECK(log.has_event("bad_eu_number"));
}

TEST_CASE("brand index requires its header row") {
    // Too short to contain the header: empty result with a warning.
    std::vector<CsvRow> rows = {{"only", "two", "rows"}, {"no", "header", "here"}};
    MemoryLog log;
    CHECK(parse_brand_index(rows, {}, log).empty());
    CHECK(log.has_event("index_too_short"));

    // A header row that lacks the required columns is a parse failure.
    std::vector<CsvRow> wrong = {
        {"a", "", ""}, {"b", "", ""}, {"Name", "Kind", "Number"}, {"X", "CH", "EU/1/12/793"}};
    CHECK_THROWS_AS(parse_brand_index(wrong), ParseError);
}

TEST_CASE("ema report parses its first-row header and normalizes dates") {
    std::vector<CsvRow> rows = {
        {"Medicine name", "INN", "ATC code", "Marketing authorisation holder",
         "Marketing authorisation date", "Therapeutic area"},
        {"ALPHARIX", "alphamab", "L01XC03", "Nordic Biologics AB", "15/03/2012", "Oncology"},
        {"betazol", "betazoline", "A10BA02", "Helvetia Pharma GmbH", "2005-06-10", "Diabetes"},
    };
    auto report = parse_ema_report(rows);
    REQUIRE(report.size() == 2);
    CHECK(report[0].approval_date == "2012-03-15"); // DD/MM/YYYY normalized
    CHECK(report[1].approval_date == "2005-06-10");
    CHECK(report[0].inn == "alphamab");
}

TEST_CASE("join matches brands case-insensitively and keeps unmatched entries") {
    std::vector<IndexEntry> entries = {
        {"Alpharix", "CH", "EU/1/12/793", 793, build_product_url(793)},
        {"Nomatch", "CH", "EU/1/11/111", 111, build_product_url(111)},
    };
    std::vector<EmaReportRow> report = {
        {"ALPHARIX", "alphamab", "L01XC03", "Nordic Biologics AB", "2012-03-15", "Oncology"},
        {"Deltacort", "deltasone", "H02AB07", "Orphan Remedies BV", "2018-01-12", "Endo"},
    };
    MemoryLog log;
    auto joined = join_with_ema_report(entries, report, log);
    REQUIRE(joined.size() == 2);
    CHECK(joined[0].inn == "alphamab");
    CHECK(joined[0].approval_date == "2012-03-15");
    CHECK(joined[1].inn.empty()); // unmatched but retained
    CHECK(joined[1].entry.eu_number == "EU/1/11/111");
}

TEST_CASE("product list csv round-trips") {
    std::vector<EnrichedProduct> products = {
        {{"Alpharix", "CH", "EU/1/12/793", 793, build_product_url(793)},
         "alphamab", "L01XC03", "Nordic Biologics AB", "2012-03-15", "Oncology"},
        {{"Quiet, Inc \"brand\"", "CH", "EU/1/11/111", 111, build_product_url(111)},
         "", "", "", "", ""},
    };
    auto rows = product_list_to_csv(products);
    REQUIRE(rows.size() == 3); // header + 2
    CHECK(rows[0] == kProductListHeader);
    auto back = product_list_from_csv(rows);
    REQUIRE(back.size() == 2);
    CHECK(back[0].entry.brand_name == products[0].entry.brand_name);
    CHECK(back[0].entry.h_number == 793);
    CHECK(back[0].approval_date == "2012-03-15");
    CHECK(back[1].entry.brand_name == "Quiet, Inc \"brand\"");
}
