#pragma once

#include <map>
#include <string>
#include <vector>

#include "aetrace/csv.hpp"
#include "aetrace/dates.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

// The two Table-style source literals. Baseline means the AE was already in
// the initial authorization label; everything later is a post-approval find.
enum class DiscoverySource { Baseline, PostApproval };

std::string to_string(DiscoverySource s);
DiscoverySource discovery_source_from_string(const std::string& s);

// One drug–AE pair with the date it first appeared across label versions.
struct TimelineEntry {
    std::string product_id;
    std::string pt_code;  // empty for unmatched terms
    std::string raw_term; // wording from the version where first seen
    std::string date_added;      // ISO
    DiscoverySource source = DiscoverySource::Baseline;
    std::string reference_date;  // PRAC meeting date when available, else empty
    std::string source_file;     // document the AE first appeared in

    bool operator==(const TimelineEntry&) const = default;
};

// One label version reduced to its mapped AE set: each AE is (raw term,
// PT code or empty when unmatched).
struct VersionedAeSet {
    std::string product_id;
    Date version_date;
    bool is_initial = false;
    std::string source_file;
    std::vector<std::pair<std::string, std::string>> aes; // (raw_term, pt_code)
};

// Diffs consecutive versions into first-appearance entries. AE identity is
// the PT code when mapped, the lower-cased raw term otherwise; an AE that
// later disappears from the label keeps its entry (additions-only model).
std::vector<TimelineEntry> build_timeline(std::vector<VersionedAeSet> versions,
                                          Log& log = null_log());

// Side input: (product_id, date_added) -> PRAC meeting date.
using PracDates = std::map<std::pair<std::string, std::string>, std::string>;

PracDates load_prac_dates(const std::string& csv_text);

// Fills reference_date where the side input provides one; rows naming a
// product absent from the entries are ignored with a warning.
std::vector<TimelineEntry> attach_reference_dates(std::vector<TimelineEntry> entries,
                                                  const PracDates& prac_dates,
                                                  Log& log = null_log());

// Version-date history of one product, for the time-to-first-update analysis.
struct ProductHistory {
    std::string product_id;
    std::string authorization_date;        // ISO; empty excludes the product
    std::vector<std::string> version_dates; // ascending ISO, first is initial
};

struct UpdateDuration {
    std::string product_id;
    long days = 0;
    bool event = false; // false = censored at the data-lock date

    bool operator==(const UpdateDuration&) const = default;
};

// Days from authorization to the first post-approval version; products that
// never updated are censored at `data_lock`. Products without a parseable
// authorization date are excluded with a warning.
std::vector<UpdateDuration> first_update_durations(const std::vector<ProductHistory>& products,
                                                   const Date& data_lock,
                                                   Log& log = null_log());

extern const CsvRow kTimelineHeader;
extern const CsvRow kDurationsHeader;

std::string timeline_to_csv(const std::vector<TimelineEntry>& entries);
std::vector<TimelineEntry> timeline_from_csv(const std::string& csv_text);

std::string durations_to_csv(const std::vector<UpdateDuration>& durations);
std::vector<UpdateDuration> durations_from_csv(const std::string& csv_text);

} // namespace aetrace
