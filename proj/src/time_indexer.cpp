#include "aetrace/time_indexer.hpp"

#include <algorithm>
#include <set>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

std::string to_string(DiscoverySource s) {
    return s == DiscoverySource::Baseline ? "Clinical Trial (Baseline)"
                                          : "Post-Approval Discovery";
}

DiscoverySource discovery_source_from_string(const std::string& s) {
    if (s == "Clinical Trial (Baseline)") return DiscoverySource::Baseline;
    if (s == "Post-Approval Discovery") return DiscoverySource::PostApproval;
    throw ParseError("unknown discovery source '" + s + "'");
}

std::vector<TimelineEntry> build_timeline(std::vector<VersionedAeSet> versions, Log& log) {
    if (versions.empty()) throw EmptyTimelineError("no versions to index");

    std::stable_sort(versions.begin(), versions.end(),
                     [](const VersionedAeSet& a, const VersionedAeSet& b) {
                         return a.version_date < b.version_date;
                     });

    // The initial label anchors the Baseline/Post-Approval split. When the
    // caller forgot to mark one, the earliest version stands in.
    Date initial_date = versions.front().version_date;
    bool marked = false;
    for (const auto& v : versions)
        if (v.is_initial) {
            initial_date = v.version_date;
            marked = true;
            break;
        }
    if (!marked)
        log.warn("no_initial_mark", "no version marked initial, using the earliest",
                 {{"product_id", versions.front().product_id}});

    std::vector<TimelineEntry> entries;
    std::set<std::string> seen;
    for (const auto& v : versions) {
        for (const auto& [raw, pt_code] : v.aes) {
            // Identity is the PT code when mapped so rewordings of the same
            // PT don't double-count; prefixes keep the two keyspaces apart.
            std::string identity = pt_code.empty() ? "raw:" + norm_key(raw) : "pt:" + pt_code;
            if (!seen.insert(identity).second) continue;
            TimelineEntry e;
            e.product_id = v.product_id;
            e.pt_code = pt_code;
            e.raw_term = raw;
            e.date_added = v.version_date.to_iso();
            e.source = v.version_date == initial_date ? DiscoverySource::Baseline
                                                      : DiscoverySource::PostApproval;
            e.source_file = v.source_file;
            entries.push_back(std::move(e));
        }
    }
    return entries;
}

PracDates load_prac_dates(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    PracDates out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i == 0 && !r.empty() && equals_icase(r[0], "product_id")) continue; // header
        if (r.size() < 3) throw ParseError("PRAC dates row " + std::to_string(i + 1) +
                                           " needs product_id,date_added,reference_date");
        out[{trim(r[0]), trim(r[1])}] = trim(r[2]);
    }
    return out;
}

std::vector<TimelineEntry> attach_reference_dates(std::vector<TimelineEntry> entries,
                                                  const PracDates& prac_dates, Log& log) {
    std::set<std::string> known_products;
    for (const auto& e : entries) known_products.insert(e.product_id);
    for (const auto& [key, date] : prac_dates)
        if (!known_products.count(key.first))
            log.warn("unknown_prac_product", "PRAC date row names a product not in the timeline",
                     {{"product_id", key.first}, {"date_added", key.second}});

    for (auto& e : entries) {
        auto it = prac_dates.find({e.product_id, e.date_added});
        if (it != prac_dates.end()) e.reference_date = it->second;
    }
    return entries;
}

std::vector<UpdateDuration> first_update_durations(const std::vector<ProductHistory>& products,
                                                   const Date& data_lock, Log& log) {
    std::vector<UpdateDuration> out;
    for (const auto& p : products) {
        auto auth = Date::parse(p.authorization_date);
        if (!auth) {
            log.warn("no_authorization_date", "product excluded from the update analysis",
                     {{"product_id", p.product_id}});
            continue;
        }
        if (p.version_dates.empty()) {
            out.push_back({p.product_id, std::max(0L, auth->days_until(data_lock)), false});
            continue;
        }
        const std::string& initial = p.version_dates.front();
        UpdateDuration d{p.product_id, 0, false};
        for (const auto& vd : p.version_dates) {
            if (vd == initial) continue;
            d.event = true;
            d.days = auth->days_until(Date::parse_or_throw(vd));
            break;
        }
        if (!d.event) d.days = auth->days_until(data_lock);
        if (d.days < 0) {
            log.warn("negative_duration", "version predates authorization, clamped to zero",
                     {{"product_id", p.product_id}, {"days", d.days}});
            d.days = 0;
        }
        out.push_back(std::move(d));
    }
    return out;
}

// --- CSV round trips ----------------------------------------------------------

const CsvRow kTimelineHeader = {"product_id", "pt_code",        "raw_term",   "date_added",
                                "source",     "reference_date", "source_file"};

std::string timeline_to_csv(const std::vector<TimelineEntry>& entries) {
    std::vector<CsvRow> rows;
    rows.push_back(kTimelineHeader);
    for (const auto& e : entries)
        rows.push_back({e.product_id, e.pt_code, e.raw_term, e.date_added, to_string(e.source),
                        e.reference_date, e.source_file});
    return csv_to_string(rows);
}

std::vector<TimelineEntry> timeline_from_csv(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw ParseError("timeline table is empty");
    if (rows.front() != kTimelineHeader)
        throw ParseError("timeline header does not match the expected schema");
    std::vector<TimelineEntry> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kTimelineHeader.size())
            throw ParseError("timeline row " + std::to_string(i + 1) +
                             " has the wrong field count");
        TimelineEntry e;
        e.product_id = r[0];
        e.pt_code = r[1];
        e.raw_term = r[2];
        e.date_added = r[3];
        e.source = discovery_source_from_string(r[4]);
        e.reference_date = r[5];
        e.source_file = r[6];
        out.push_back(std::move(e));
    }
    return out;
}

const CsvRow kDurationsHeader = {"product_id", "days", "event"};

std::string durations_to_csv(const std::vector<UpdateDuration>& durations) {
    std::vector<CsvRow> rows;
    rows.push_back(kDurationsHeader);
    for (const auto& d : durations)
        rows.push_back({d.product_id, std::to_string(d.days), d.event ? "1" : "0"});
    return csv_to_string(rows);
}

std::vector<UpdateDuration> durations_from_csv(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw ParseError("durations table is empty");
    if (rows.front() != kDurationsHeader)
        throw ParseError("durations header does not match the expected schema");
    std::vector<UpdateDuration> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kDurationsHeader.size())
            throw ParseError("durations row " + std::to_string(i + 1) +
                             " has the wrong field count");
        out.push_back({r[0], std::stol(r[1]), r[2] == "1"});
    }
    return out;
}

} // namespace aetrace
