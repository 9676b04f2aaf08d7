#include <doctest.h>

#include "aetrace/errors.hpp"
#include "aetrace/validation.hpp"
#include "test_util.hpp"

using namespace aetrace;

TEST_CASE("judge covers all five verdict categories on the worked example") {
    // gold {A,B,C,D}, extracted {A,B,B,E}: A,B correct; C,D missing;
    // E incorrect; B extracted twice adds one duplicate.
    auto verdicts = judge({"A", "B", "B", "E"}, {"A", "B", "C", "D"});
    auto counts = verdict_counts(verdicts);
    CHECK(counts[VerdictCategory::Correct] == 2);
    CHECK(counts[VerdictCategory::Missing] == 2);
    CHECK(counts[VerdictCategory::Incorrect] == 1);
    CHECK(counts[VerdictCategory::Duplicate] == 1);
    CHECK(counts[VerdictCategory::Triplicate] == 0);
    CHECK(accuracy(verdicts) == doctest::Approx(2.0 / 6.0));
}

TEST_CASE("judge normalizes case and padding before comparing") {
    auto verdicts = judge({"  HEADACHE ", "nausea"}, {"Headache", "Nausea"});
    auto counts = verdict_counts(verdicts);
    CHECK(counts[VerdictCategory::Correct] == 2);
    CHECK(counts[VerdictCategory::Incorrect] == 0);
    CHECK(counts[VerdictCategory::Missing] == 0);
}

TEST_CASE("a term extracted three times yields a triplicate verdict") {
    auto verdicts = judge({"A", "A", "A"}, {"A"});
    auto counts = verdict_counts(verdicts);
    CHECK(counts[VerdictCategory::Correct] == 1);
    CHECK(counts[VerdictCategory::Duplicate] == 0);
    CHECK(counts[VerdictCategory::Triplicate] == 1);
}

TEST_CASE("accuracy on a 19-correct one-missing list is 0.95") {
    std::vector<std::string> gold, extracted;
    for (int i = 0; i < 20; ++i) gold.push_back("term" + std::to_string(i));
    for (int i = 0; i < 19; ++i) extracted.push_back("term" + std::to_string(i));
    auto verdicts = judge(extracted, gold);
    CHECK(accuracy(verdicts) == doctest::Approx(0.95));
}

TEST_CASE("accuracy of an empty verdict list is undefined") {
    CHECK_THROWS_AS(accuracy({}), ValidationError);
}

TEST_CASE("mapping breakdown counts methods over unique terms") {
    std::vector<MappedTerm> mapping = {
        {"a", "A", "1", "", "", "", "", "", "", MatchMethod::ExactMatch},
        {"b", "B", "2", "", "", "", "", "", "", MatchMethod::ExactMatch},
        {"c", "C", "3", "", "", "", "", "", "", MatchMethod::SocFilteredMatch},
        {"d", "D", "4", "", "", "", "", "", "", MatchMethod::Manual},
        {"e", "", "", "", "", "", "", "", "", MatchMethod::Unmatched},
        {"f", "", "", "", "", "", "", "", "", MatchMethod::Error},
    };
    auto breakdown = mapping_breakdown(mapping);
    CHECK(breakdown.total == 6);
    CHECK(breakdown.counts[MatchMethod::ExactMatch] == 2);
    CHECK(breakdown.fractions[MatchMethod::ExactMatch] == doctest::Approx(2.0 / 6.0));
    // Success = exact + soc-filtered + manual.
    CHECK(breakdown.success == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("manual overrides rewrite rows with the full hierarchy") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    std::vector<MappedTerm> mapping = {
        {"Tingling of extremities", "", "", "", "", "", "", "", "", MatchMethod::Unmatched},
        {"Headache", "Headache", "10019211", "Headaches", "30000003",
         "Neurological disorders NEC", "20000003", "Nervous system disorders", "10029205",
         MatchMethod::ExactMatch},
    };
    auto overrides = load_overrides("term,pt_code\nTingling of extremities,10033775\n");
    REQUIRE(overrides.size() == 1);

    MemoryLog log;
    auto out = apply_manual_overrides(mapping, overrides, h, log);
    CHECK(out[0].method == MatchMethod::Manual);
    CHECK(out[0].pt_term == "Paraesthesia");
    CHECK(out[0].pt_code == "10033775");
    CHECK(out[0].soc_term == "Nervous system disorders");
    CHECK(out[0].hlt_code == "30000004");
    CHECK(out[1] == mapping[1]); // untouched
    CHECK(log.has_event("manual_override"));

    // Idempotent: applying again changes nothing.
    auto again = apply_manual_overrides(out, overrides, h, log);
    CHECK(again == out);
}

TEST_CASE("overrides match terms case-insensitively") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    std::vector<MappedTerm> mapping = {
        {"TINGLING of Extremities", "", "", "", "", "", "", "", "", MatchMethod::Unmatched},
    };
    auto out = apply_manual_overrides(
        mapping, {{"tingling of extremities", "10033775"}}, h);
    CHECK(out[0].method == MatchMethod::Manual);
}

TEST_CASE("an override citing an unknown pt code is rejected") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    std::vector<MappedTerm> mapping = {
        {"x", "", "", "", "", "", "", "", "", MatchMethod::Unmatched}};
    try {
        apply_manual_overrides(mapping, {{"x", "99999999"}}, h);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("99999999") != std::string::npos);
    }
}

TEST_CASE("validation report serializes counts, accuracy and breakdown") {
    ValidationReport report;
    report.category_counts[VerdictCategory::Correct] = 13;
    report.category_counts[VerdictCategory::Incorrect] = 1;
    report.category_counts[VerdictCategory::Missing] = 1;
    report.extraction_accuracy = 13.0 / 15.0;
    report.judged_items = 15;
    report.mapping.total = 15;
    report.mapping.counts[MatchMethod::ExactMatch] = 12;
    report.mapping.success = 14.0 / 15.0;

    auto text = report_to_json(report);
    CHECK(text.find("\"Correct\": 13") != std::string::npos);
    CHECK(text.find("extraction_accuracy") != std::string::npos);
    CHECK(text.find("Exact Match") != std::string::npos);
}
