#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aetrace/dataset.hpp"
#include "aetrace/time_indexer.hpp"

namespace aetrace {

// One row of a plot-ready table: a key with its count and fraction.
struct DistRow {
    std::string key;
    long count = 0;
    double fraction = 0.0;

    bool operator==(const DistRow&) const = default;
};

using DistributionTable = std::vector<DistRow>;

// Rows whose Date Added does not parse are excluded and counted here.
struct YearTableResult {
    DistributionTable table;
    std::size_t excluded = 0;
};

// Cumulative association count per calendar year, from the earliest year
// through the data-lock year; fraction is the share of the final total.
YearTableResult cumulative_growth(const std::vector<DrugAeAssociation>& rows,
                                  int data_lock_year);

// Non-cumulative additions per year (contiguous range, zero-count years
// kept). With the flag set only Post-Approval rows count.
YearTableResult annual_additions(const std::vector<DrugAeAssociation>& rows,
                                 bool post_approval_only);

// Baseline vs Post-Approval counts and fractions.
DistributionTable source_split(const std::vector<DrugAeAssociation>& rows);

// Product-limit survival estimate over first-update durations.
struct SurvivalCurve {
    std::vector<long> times;      // distinct event times, ascending
    std::vector<long> at_risk;    // n_t at each time
    std::vector<long> events;     // d_t at each time
    std::vector<double> survival; // S(t) after each time
    std::optional<long> median;   // first time with S <= 0.5, if reached
};

SurvivalCurve km_estimate(const std::vector<UpdateDuration>& durations);

// Distinct-product count per unique PT, bucketed. Default edges give the
// buckets 1 / 2-10 / 11-100 / >100.
DistributionTable ubiquity(const std::vector<DrugAeAssociation>& rows,
                           const std::vector<long>& bucket_edges = {1, 10, 100});

// Per-product distinct PT and SOC counts with their summary statistics.
struct DensitySummary {
    std::vector<std::pair<std::string, long>> pt_counts;  // per product
    std::vector<std::pair<std::string, long>> soc_counts; // per product
    double pt_median = 0, pt_mean = 0, pt_q1 = 0, pt_q3 = 0;
    double soc_median = 0, soc_mean = 0;
};

DensitySummary per_drug_density(const std::vector<DrugAeAssociation>& rows);

// Counts per ATC level-1 group / per SOC, sorted descending (empty keys
// grouped as "Unknown").
DistributionTable atc_level1_distribution(const std::vector<DrugAeAssociation>& rows);
DistributionTable soc_distribution(const std::vector<DrugAeAssociation>& rows);

// Hierarchical ATC level-1/level-2 breakdown; keys are "L1/L2" pairs.
DistributionTable atc_hierarchy_distribution(const std::vector<DrugAeAssociation>& rows);

// Per-SOC stratification of the Baseline/Post-Approval split; fractions are
// within each source cohort.
struct SocSourceRow {
    std::string soc;
    std::string source;
    long count = 0;
    double fraction = 0.0;
};

std::vector<SocSourceRow> soc_source_split(const std::vector<DrugAeAssociation>& rows);

// SOC percentage distribution for biologic vs small-molecule cohorts over
// the top-12 SOCs by combined count; fractions normalize within each cohort
// across those SOCs. INNs absent from the biologic list default to
// small-molecule (count reported by the caller via the returned flag).
struct DrugTypeRow {
    std::string soc;
    std::string cohort; // "biologic" or "small_molecule"
    long count = 0;
    double fraction = 0.0;
};

std::vector<DrugTypeRow> drug_type_comparison(const std::vector<DrugAeAssociation>& rows,
                                              const std::set<std::string>& biologic_inns);

// First-ever appearance year of each unique PT; table total equals the
// number of distinct PTs.
YearTableResult new_pt_introduction(const std::vector<DrugAeAssociation>& rows);

// Regulatory procedure-type mix of the dataset rows.
DistributionTable procedure_type_distribution(const std::vector<DrugAeAssociation>& rows);

std::string distribution_to_csv(const DistributionTable& table,
                                const std::string& key_column);
std::string survival_to_csv(const SurvivalCurve& curve);

// Computes every panel table (fig1a..fig4b) plus summary.json into out_dir.
// Returns the written file paths in a fixed order.
std::vector<std::filesystem::path> write_analytics(const std::vector<DrugAeAssociation>& rows,
                                                   const std::vector<UpdateDuration>& durations,
                                                   const std::set<std::string>& biologic_inns,
                                                   int data_lock_year,
                                                   const std::filesystem::path& out_dir,
                                                   Log& log = null_log());

} // namespace aetrace
