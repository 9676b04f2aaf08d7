#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "aetrace/analytics.hpp"
#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "test_util.hpp"

using namespace aetrace;

namespace {

DrugAeAssociation row(const char* eu, const char* inn, const char* pt_code,
                      const char* pt_term, const char* soc, const char* date,
                      const char* source, const char* atc1 = "L") {
    DrugAeAssociation r;
    r.brand_name = eu;
    r.inn = inn;
    r.eu_num = eu;
    r.llm_extracted_ae = pt_term;
    r.source = source;
    r.date_added = date;
    r.pt_term = pt_term;
    r.pt_code = pt_code;
    r.soc_term = soc;
    r.atc.l1_code = atc1;
    r.atc.l2_code = std::string(atc1) + "01";
    return r;
}

} // namespace

TEST_CASE("km estimate matches the hand-computed three-event curve") {
    // Durations {1, 2, 3}, all events: S = 2/3, 1/3, 0; median = first time
    // with S <= 0.5, which is 2.
    auto curve = km_estimate({{"a", 1, true}, {"b", 2, true}, {"c", 3, true}});
    REQUIRE(curve.times == std::vector<long>{1, 2, 3});
    CHECK(curve.at_risk == std::vector<long>{3, 2, 1});
    CHECK(curve.events == std::vector<long>{1, 1, 1});
    CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
    CHECK(curve.survival[1] == doctest::Approx(1.0 / 3.0));
    CHECK(curve.survival[2] == doctest::Approx(0.0));
    REQUIRE(curve.median.has_value());
    CHECK(*curve.median == 2);
}

TEST_CASE("censored subjects stay at risk through their censoring time") {
    // Event at 2 with a censored 2: both at risk at t=2, one event.
    auto curve = km_estimate({{"a", 2, true}, {"b", 2, false}, {"c", 5, true}});
    REQUIRE(curve.times == std::vector<long>{2, 5});
    CHECK(curve.at_risk == std::vector<long>{3, 1});
    CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
    CHECK(curve.survival[1] == doctest::Approx(0.0));
}

TEST_CASE("a curve that never crosses one-half has no median") {
    auto curve = km_estimate({{"a", 1, true}, {"b", 10, false}, {"c", 10, false}});
    CHECK(curve.survival[0] == doctest::Approx(2.0 / 3.0));
    CHECK_FALSE(curve.median.has_value());

    // The estimate is undefined on an empty cohort.
    CHECK_THROWS_AS(km_estimate({}), AnalyticsError);
}

TEST_CASE("km estimate matches an independent product-limit oracle") {
    std::mt19937 rng(424242);
    std::uniform_int_distribution<long> days(1, 4000);
    std::bernoulli_distribution censored(0.3);

    std::vector<UpdateDuration> durations;
    for (int i = 0; i < 1000; ++i)
        durations.push_back({"p" + std::to_string(i), days(rng), !censored(rng)});

    auto curve = km_estimate(durations);

    // Oracle: direct definition. At each distinct event time t (ascending),
    // n_t = subjects with duration >= t, d_t = events at exactly t,
    // S *= (1 - d/n).
    std::set<long> event_times;
    for (const auto& d : durations)
        if (d.event) event_times.insert(d.days);
    REQUIRE(curve.times == std::vector<long>(event_times.begin(), event_times.end()));

    double survival = 1.0;
    size_t idx = 0;
    std::optional<long> median;
    for (long t : event_times) {
        long at_risk = 0, events = 0;
        for (const auto& d : durations) {
            if (d.days >= t) ++at_risk;
            if (d.event && d.days == t) ++events;
        }
        survival *= 1.0 - double(events) / double(at_risk);
        CHECK(curve.at_risk[idx] == at_risk);
        CHECK(curve.events[idx] == events);
        CHECK(std::abs(curve.survival[idx] - survival) <=
              1e-12 * std::max(1.0, std::abs(survival)));
        if (!median && survival <= 0.5) median = t;
        ++idx;
    }
    CHECK(curve.median == median);
}

TEST_CASE("cumulative growth is the running sum of annual additions") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "a", "1", "Headache", "Nervous system disorders", "2012-03-15",
            "Clinical Trial (Baseline)"),
        row("EU/1", "a", "2", "Nausea", "Gastrointestinal disorders", "2012-06-01",
            "Clinical Trial (Baseline)"),
        row("EU/1", "a", "3", "Rash", "Skin disorders", "2014-07-01",
            "Post-Approval Discovery"),
    };
    auto annual = annual_additions(rows, false);
    auto cumulative = cumulative_growth(rows, 2015);

    // Annual: contiguous 2012..2015 with zero-count years kept.
    REQUIRE(annual.table.size() == 3); // 2012..2014 (annual range ends at last data year)
    CHECK(annual.table[0].key == "2012");
    CHECK(annual.table[0].count == 2);
    CHECK(annual.table[1].count == 0);
    CHECK(annual.table[2].count == 1);

    // Cumulative runs through the data-lock year and ends at the total.
    REQUIRE(cumulative.table.size() == 4); // 2012..2015
    CHECK(cumulative.table[0].count == 2);
    CHECK(cumulative.table[1].count == 2);
    CHECK(cumulative.table[2].count == 3);
    CHECK(cumulative.table[3].count == 3);
    CHECK(cumulative.table.back().fraction == doctest::Approx(1.0));

    long running = 0;
    for (size_t i = 0; i < annual.table.size(); ++i) {
        running += annual.table[i].count;
        CHECK(cumulative.table[i].count == running);
    }
}

TEST_CASE("rows with unparseable dates are excluded and counted") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "a", "1", "Headache", "S", "2012-03-15", "Clinical Trial (Baseline)"),
        row("EU/1", "a", "2", "Nausea", "S", "not a date", "Clinical Trial (Baseline)"),
    };
    auto result = annual_additions(rows, false);
    CHECK(result.excluded == 1);
    CHECK(result.table[0].count == 1);
}

TEST_CASE("post-approval-only annual additions filter by source") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "a", "1", "Headache", "S", "2012-03-15", "Clinical Trial (Baseline)"),
        row("EU/1", "a", "3", "Rash", "S", "2014-07-01", "Post-Approval Discovery"),
    };
    auto result = annual_additions(rows, true);
    long total = 0;
    for (const auto& r : result.table) total += r.count;
    CHECK(total == 1);
}

TEST_CASE("ubiquity buckets count distinct products per pt") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "a", "1", "Headache", "S", "2012-01-01", "Clinical Trial (Baseline)"),
        row("EU/2", "b", "1", "Headache", "S", "2013-01-01", "Clinical Trial (Baseline)"),
        row("EU/1", "a", "1", "Headache", "S", "2014-01-01", "Post-Approval Discovery"),
        row("EU/1", "a", "2", "Nausea", "S", "2012-01-01", "Clinical Trial (Baseline)"),
    };
    auto table = ubiquity(rows);
    REQUIRE(table.size() == 4);
    CHECK(table[0].key == "1");
    CHECK(table[0].count == 1); // Nausea in one product
    CHECK(table[1].key == "2-10");
    CHECK(table[1].count == 1); // Headache in two products
    CHECK(table[2].count == 0);
    CHECK(table[3].count == 0);
}

TEST_CASE("new pt introduction totals the distinct pt count") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "a", "1", "Headache", "S", "2012-01-01", "Clinical Trial (Baseline)"),
        row("EU/2", "b", "1", "Headache", "S", "2015-01-01", "Clinical Trial (Baseline)"),
        row("EU/1", "a", "2", "Nausea", "S", "2014-01-01", "Post-Approval Discovery"),
    };
    auto result = new_pt_introduction(rows);
    long total = 0;
    for (const auto& r : result.table) total += r.count;
    CHECK(total == 2); // two distinct PTs; the 2015 re-appearance is not new
    CHECK(result.table[0].key == "2012");
    CHECK(result.table[0].count == 1);
}

TEST_CASE("per-drug density reports quartiles over distinct counts") {
    std::vector<DrugAeAssociation> rows;
    // Product 1: 3 distinct PTs, product 2: 1 PT.
    rows.push_back(row("EU/1", "a", "1", "A", "S1", "2012-01-01", "Clinical Trial (Baseline)"));
    rows.push_back(row("EU/1", "a", "2", "B", "S1", "2012-01-01", "Clinical Trial (Baseline)"));
    rows.push_back(row("EU/1", "a", "3", "C", "S2", "2012-01-01", "Clinical Trial (Baseline)"));
    rows.push_back(row("EU/2", "b", "1", "A", "S1", "2012-01-01", "Clinical Trial (Baseline)"));
    auto density = per_drug_density(rows);
    REQUIRE(density.pt_counts.size() == 2);
    CHECK(density.pt_mean == doctest::Approx(2.0));
    CHECK(density.pt_median == doctest::Approx(2.0));
    REQUIRE(density.soc_counts.size() == 2);
    CHECK(density.soc_median == doctest::Approx(1.5)); // {2, 1}
}

TEST_CASE("drug type comparison splits cohorts by the biologic list") {
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "alphamab", "1", "A", "SocX", "2012-01-01", "Clinical Trial (Baseline)"),
        row("EU/1", "alphamab", "2", "B", "SocY", "2012-01-01", "Clinical Trial (Baseline)"),
        row("EU/2", "smallmol", "3", "C", "SocX", "2012-01-01", "Clinical Trial (Baseline)"),
    };
    auto table = drug_type_comparison(rows, {"alphamab"});
    long biologic_total = 0, small_total = 0;
    double biologic_fraction = 0, small_fraction = 0;
    for (const auto& r : table) {
        if (r.cohort == "biologic") { biologic_total += r.count; biologic_fraction += r.fraction; }
        if (r.cohort == "small_molecule") { small_total += r.count; small_fraction += r.fraction; }
    }
    CHECK(biologic_total == 2);
    CHECK(small_total == 1);
    CHECK(biologic_fraction == doctest::Approx(1.0)); // fractions normalize per cohort
    CHECK(small_fraction == doctest::Approx(1.0));
}

TEST_CASE("distribution identities hold on randomized datasets") {
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> year(2000, 2024), pt(1, 40), prod(1, 15), soc(1, 6);
    std::bernoulli_distribution post(0.4);

    for (int trial = 0; trial < 20; ++trial) {
        std::vector<DrugAeAssociation> rows;
        int n = 50 + trial * 25;
        for (int i = 0; i < n; ++i) {
            char date[11];
            std::snprintf(date, sizeof date, "%04d-06-15", year(rng));
            auto r = row(("EU/" + std::to_string(prod(rng))).c_str(), "inn",
                         std::to_string(pt(rng)).c_str(), "term",
                         ("Soc" + std::to_string(soc(rng))).c_str(), date,
                         post(rng) ? "Post-Approval Discovery" : "Clinical Trial (Baseline)");
            rows.push_back(r);
        }

        // Identity 1: cumulative = running sum of annual additions.
        auto annual = annual_additions(rows, false);
        auto cumulative = cumulative_growth(rows, 2025);
        long running = 0;
        for (size_t i = 0; i < annual.table.size(); ++i) {
            running += annual.table[i].count;
            CHECK(cumulative.table[i].count == running);
        }
        CHECK(cumulative.table.back().count == static_cast<long>(rows.size()));

        // Identity 2: source split fractions sum to one.
        auto split = source_split(rows);
        double fraction_sum = 0;
        long split_total = 0;
        for (const auto& s : split) { fraction_sum += s.fraction; split_total += s.count; }
        CHECK(fraction_sum == doctest::Approx(1.0));
        CHECK(split_total == static_cast<long>(rows.size()));

        // Identity 3: new-PT introductions total the distinct PT count.
        std::set<std::string> pts;
        for (const auto& r : rows) pts.insert(r.pt_code);
        auto intro = new_pt_introduction(rows);
        long intro_total = 0;
        for (const auto& r : intro.table) intro_total += r.count;
        CHECK(intro_total == static_cast<long>(pts.size()));

        // Identity 4: ubiquity counts total the distinct PT count too.
        auto ub = ubiquity(rows);
        long ub_total = 0;
        for (const auto& r : ub) ub_total += r.count;
        CHECK(ub_total == static_cast<long>(pts.size()));
    }
}

TEST_CASE("write_analytics produces the full panel set") {
    testutil::TempDir dir;
    std::vector<DrugAeAssociation> rows = {
        row("EU/1", "alphamab", "1", "Headache", "Nervous system disorders", "2012-03-15",
            "Clinical Trial (Baseline)"),
        row("EU/1", "alphamab", "2", "Rash", "Skin disorders", "2014-07-01",
            "Post-Approval Discovery"),
    };
    std::vector<UpdateDuration> durations = {{"EU/1", 838, true}};
    auto files = write_analytics(rows, durations, {"alphamab"}, 2025, dir);
    CHECK(files.size() == 13); // 12 panel tables + summary.json
    for (const auto& f : files) CHECK(std::filesystem::exists(f));
    auto summary = read_file(dir / "summary.json");
    CHECK(summary.find("median_days_to_first_update") != std::string::npos);
    CHECK(summary.find("838") != std::string::npos);
}
