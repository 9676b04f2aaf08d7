#pragma once

#include <map>
#include <string>
#include <vector>

#include "aetrace/logging.hpp"
#include "aetrace/meddra.hpp"

namespace aetrace {

// The five review categories for one judged item.
enum class VerdictCategory { Correct, Incorrect, Missing, Duplicate, Triplicate };

std::string to_string(VerdictCategory c);

struct Verdict {
    std::string item;
    VerdictCategory category;

    bool operator==(const Verdict&) const = default;
};

// Compares extracted occurrences against a reviewer gold list. Terms are
// normalized (lower-case, trimmed) before comparison. Every gold term yields
// Correct or Missing; every extracted term absent from gold yields
// Incorrect; a term extracted exactly twice adds one Duplicate verdict,
// three or more times one Triplicate verdict.
std::vector<Verdict> judge(const std::vector<std::string>& extracted,
                           const std::vector<std::string>& gold);

std::map<VerdictCategory, std::size_t> verdict_counts(const std::vector<Verdict>& verdicts);

// Correct / (Correct + Incorrect + Missing + Duplicate + Triplicate).
// Undefined on an empty verdict list (ValidationError).
double accuracy(const std::vector<Verdict>& verdicts);

struct MappingBreakdown {
    std::map<MatchMethod, std::size_t> counts;
    std::map<MatchMethod, double> fractions; // over unique terms
    double success = 0.0;                    // Exact + SOC-Filtered + Manual
    std::size_t total = 0;
};

MappingBreakdown mapping_breakdown(const std::vector<MappedTerm>& mapped_terms);

// term -> PT code, reviewer-supplied. Loaded from a two-column table.
using ManualOverrides = std::vector<std::pair<std::string, std::string>>;

ManualOverrides load_overrides(const std::string& csv_text);

// Rewrites overridden rows with method Manual and the full hierarchy of the
// assigned PT; other rows are untouched. An override citing a PT code absent
// from the hierarchy is rejected (ValidationError naming the code).
// Idempotent.
std::vector<MappedTerm> apply_manual_overrides(std::vector<MappedTerm> mapping,
                                               const ManualOverrides& overrides,
                                               const Hierarchy& h, Log& log = null_log());

struct ValidationReport {
    std::map<VerdictCategory, std::size_t> category_counts;
    double extraction_accuracy = 0.0;
    MappingBreakdown mapping;
    std::size_t judged_items = 0;
};

std::string report_to_json(const ValidationReport& report);

} // namespace aetrace
