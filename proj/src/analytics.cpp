#include "aetrace/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <json.hpp>

#include "aetrace/dates.hpp"
#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace fs = std::filesystem;

namespace {

std::optional<int> year_of(const std::string& iso_date) {
    auto d = Date::parse(iso_date);
    if (!d) return std::nullopt;
    return d->year();
}

// Unmatched rows have no PT code; their identity falls back to the raw term.
std::string pt_identity(const DrugAeAssociation& r) {
    return r.pt_code.empty() ? "raw:" + norm_key(r.llm_extracted_ae) : "pt:" + r.pt_code;
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

DistributionTable counts_to_sorted_table(const std::map<std::string, long>& counts) {
    long total = 0;
    for (const auto& [k, c] : counts) total += c;
    DistributionTable table;
    for (const auto& [k, c] : counts)
        table.push_back({k, c, total == 0 ? 0.0 : static_cast<double>(c) / total});
    std::sort(table.begin(), table.end(), [](const DistRow& a, const DistRow& b) {
        if (a.count != b.count) return a.count > b.count;
        return a.key < b.key;
    });
    return table;
}

double median_of(std::vector<long> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    if (n % 2 == 1) return static_cast<double>(v[n / 2]);
    return (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
}

// Tukey hinges: medians of the lower/upper halves, middle element excluded
// when the sample size is odd.
std::pair<double, double> quartiles_of(std::vector<long> v) {
    if (v.empty()) return {0.0, 0.0};
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    std::vector<long> lower(v.begin(), v.begin() + n / 2);
    std::vector<long> upper(v.begin() + (n + 1) / 2, v.end());
    return {median_of(lower), median_of(upper)};
}

} // namespace

YearTableResult cumulative_growth(const std::vector<DrugAeAssociation>& rows,
                                  int data_lock_year) {
    YearTableResult out;
    std::map<int, long> per_year;
    for (const auto& r : rows) {
        auto y = year_of(r.date_added);
        if (!y) { ++out.excluded; continue; }
        ++per_year[*y];
    }
    if (per_year.empty()) return out;

    long total = 0;
    for (const auto& [y, c] : per_year) total += c;

    long running = 0;
    int last_year = std::max(data_lock_year, per_year.rbegin()->first);
    for (int y = per_year.begin()->first; y <= last_year; ++y) {
        if (auto it = per_year.find(y); it != per_year.end()) running += it->second;
        out.table.push_back({std::to_string(y), running,
                             total == 0 ? 0.0 : static_cast<double>(running) / total});
    }
    return out;
}

YearTableResult annual_additions(const std::vector<DrugAeAssociation>& rows,
                                 bool post_approval_only) {
    YearTableResult out;
    std::map<int, long> per_year;
    for (const auto& r : rows) {
        if (post_approval_only && r.source != to_string(DiscoverySource::PostApproval)) continue;
        auto y = year_of(r.date_added);
        if (!y) { ++out.excluded; continue; }
        ++per_year[*y];
    }
    if (per_year.empty()) return out;

    long total = 0;
    for (const auto& [y, c] : per_year) total += c;
    for (int y = per_year.begin()->first; y <= per_year.rbegin()->first; ++y) {
        long c = per_year.count(y) ? per_year[y] : 0;
        out.table.push_back({std::to_string(y), c,
                             total == 0 ? 0.0 : static_cast<double>(c) / total});
    }
    return out;
}

DistributionTable source_split(const std::vector<DrugAeAssociation>& rows) {
    long baseline = 0, post = 0;
    for (const auto& r : rows) {
        if (r.source == to_string(DiscoverySource::Baseline)) ++baseline;
        else if (r.source == to_string(DiscoverySource::PostApproval)) ++post;
    }
    long total = baseline + post;
    auto frac = [total](long c) { return total == 0 ? 0.0 : static_cast<double>(c) / total; };
    return {{to_string(DiscoverySource::Baseline), baseline, frac(baseline)},
            {to_string(DiscoverySource::PostApproval), post, frac(post)}};
}

SurvivalCurve km_estimate(const std::vector<UpdateDuration>& durations) {
    if (durations.empty()) throw AnalyticsError("survival estimate needs at least one duration");
    for (const auto& d : durations)
        if (d.days < 0) throw AnalyticsError("negative duration for " + d.product_id);

    // d_t and the censor count at each distinct time.
    std::map<long, std::pair<long, long>> at_time; // t -> (events, censored)
    for (const auto& d : durations) {
        auto& slot = at_time[d.days];
        if (d.event) ++slot.first;
        else ++slot.second;
    }

    SurvivalCurve curve;
    long at_risk = static_cast<long>(durations.size());
    double s = 1.0;
    for (const auto& [t, slot] : at_time) {
        const auto [events, censored] = slot;
        if (events > 0) {
            s *= 1.0 - static_cast<double>(events) / static_cast<double>(at_risk);
            curve.times.push_back(t);
            curve.at_risk.push_back(at_risk);
            curve.events.push_back(events);
            curve.survival.push_back(s);
            if (!curve.median && s <= 0.5) curve.median = t;
        }
        // Subjects censored at t were still at risk at t.
        at_risk -= events + censored;
    }
    return curve;
}

DistributionTable ubiquity(const std::vector<DrugAeAssociation>& rows,
                           const std::vector<long>& bucket_edges) {
    std::map<std::string, std::set<std::string>> products_per_pt;
    for (const auto& r : rows) products_per_pt[pt_identity(r)].insert(r.eu_num);

    auto bucket_label = [&bucket_edges](std::size_t i) {
        if (i == 0) return bucket_edges[0] == 1 ? std::string("1")
                                                : "1-" + std::to_string(bucket_edges[0]);
        if (i == bucket_edges.size()) return ">" + std::to_string(bucket_edges.back());
        return std::to_string(bucket_edges[i - 1] + 1) + "-" + std::to_string(bucket_edges[i]);
    };

    std::map<std::string, long> counts;
    for (std::size_t i = 0; i <= bucket_edges.size(); ++i) counts[bucket_label(i)] = 0;
    for (const auto& [pt, products] : products_per_pt) {
        long n = static_cast<long>(products.size());
        std::size_t i = 0;
        while (i < bucket_edges.size() && n > bucket_edges[i]) ++i;
        ++counts[bucket_label(i)];
    }

    long total = static_cast<long>(products_per_pt.size());
    // Keep bucket order (not count order): the table reads smallest first.
    DistributionTable table;
    for (std::size_t i = 0; i <= bucket_edges.size(); ++i) {
        long c = counts[bucket_label(i)];
        table.push_back({bucket_label(i), c, total == 0 ? 0.0 : static_cast<double>(c) / total});
    }
    return table;
}

DensitySummary per_drug_density(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, std::set<std::string>> pts, socs;
    for (const auto& r : rows) {
        pts[r.eu_num].insert(pt_identity(r));
        if (!r.soc_term.empty()) socs[r.eu_num].insert(r.soc_term);
    }

    DensitySummary out;
    std::vector<long> pt_counts, soc_counts;
    for (const auto& [product, set] : pts) {
        out.pt_counts.emplace_back(product, static_cast<long>(set.size()));
        pt_counts.push_back(static_cast<long>(set.size()));
    }
    for (const auto& [product, set] : socs) {
        out.soc_counts.emplace_back(product, static_cast<long>(set.size()));
        soc_counts.push_back(static_cast<long>(set.size()));
    }

    if (!pt_counts.empty()) {
        out.pt_median = median_of(pt_counts);
        long sum = 0;
        for (long c : pt_counts) sum += c;
        out.pt_mean = static_cast<double>(sum) / pt_counts.size();
        std::tie(out.pt_q1, out.pt_q3) = quartiles_of(pt_counts);
    }
    if (!soc_counts.empty()) {
        out.soc_median = median_of(soc_counts);
        long sum = 0;
        for (long c : soc_counts) sum += c;
        out.soc_mean = static_cast<double>(sum) / soc_counts.size();
    }
    return out;
}

DistributionTable atc_level1_distribution(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, long> counts;
    for (const auto& r : rows)
        ++counts[r.atc.l1_code.empty() ? "Unknown" : r.atc.l1_code];
    return counts_to_sorted_table(counts);
}

DistributionTable soc_distribution(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, long> counts;
    for (const auto& r : rows) ++counts[r.soc_term.empty() ? "Unknown" : r.soc_term];
    return counts_to_sorted_table(counts);
}

DistributionTable atc_hierarchy_distribution(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, long> counts;
    for (const auto& r : rows) {
        std::string l1 = r.atc.l1_code.empty() ? "Unknown" : r.atc.l1_code;
        std::string l2 = r.atc.l2_code.empty() ? "Unknown" : r.atc.l2_code;
        ++counts[l1 + "/" + l2];
    }
    return counts_to_sorted_table(counts);
}

std::vector<SocSourceRow> soc_source_split(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, std::map<std::string, long>> per_source; // source -> soc -> count
    std::map<std::string, long> source_totals;
    for (const auto& r : rows) {
        std::string soc = r.soc_term.empty() ? "Unknown" : r.soc_term;
        ++per_source[r.source][soc];
        ++source_totals[r.source];
    }
    std::vector<SocSourceRow> out;
    for (const auto& source : {to_string(DiscoverySource::Baseline),
                               to_string(DiscoverySource::PostApproval)}) {
        auto it = per_source.find(source);
        if (it == per_source.end()) continue;
        long total = source_totals[source];
        for (const auto& [soc, count] : it->second)
            out.push_back({soc, source, count,
                           total == 0 ? 0.0 : static_cast<double>(count) / total});
    }
    return out;
}

std::vector<DrugTypeRow> drug_type_comparison(const std::vector<DrugAeAssociation>& rows,
                                              const std::set<std::string>& biologic_inns) {
    std::set<std::string> biologics;
    for (const auto& inn : biologic_inns) biologics.insert(norm_key(inn));

    std::map<std::string, std::map<std::string, long>> cohort_soc; // cohort -> soc -> count
    std::map<std::string, long> combined;
    for (const auto& r : rows) {
        if (r.soc_term.empty()) continue;
        std::string cohort =
            biologics.count(norm_key(r.inn)) ? "biologic" : "small_molecule";
        ++cohort_soc[cohort][r.soc_term];
        ++combined[r.soc_term];
    }

    // Top 12 SOCs by combined count, ties by name.
    DistributionTable ranked = counts_to_sorted_table(combined);
    std::vector<std::string> top;
    for (const auto& row : ranked) {
        top.push_back(row.key);
        if (top.size() == 12) break;
    }

    std::vector<DrugTypeRow> out;
    for (const auto& cohort : {std::string("biologic"), std::string("small_molecule")}) {
        long cohort_total = 0;
        for (const auto& soc : top) {
            auto cit = cohort_soc.find(cohort);
            if (cit != cohort_soc.end() && cit->second.count(soc))
                cohort_total += cit->second.at(soc);
        }
        for (const auto& soc : top) {
            long c = 0;
            if (auto cit = cohort_soc.find(cohort); cit != cohort_soc.end())
                if (auto sit = cit->second.find(soc); sit != cit->second.end()) c = sit->second;
            out.push_back({soc, cohort, c,
                           cohort_total == 0 ? 0.0 : static_cast<double>(c) / cohort_total});
        }
    }
    return out;
}

YearTableResult new_pt_introduction(const std::vector<DrugAeAssociation>& rows) {
    YearTableResult out;
    std::map<std::string, int> first_year; // PT identity -> earliest year
    for (const auto& r : rows) {
        auto y = year_of(r.date_added);
        if (!y) { ++out.excluded; continue; }
        auto [it, inserted] = first_year.emplace(pt_identity(r), *y);
        if (!inserted && *y < it->second) it->second = *y;
    }
    std::map<std::string, long> per_year;
    for (const auto& [pt, y] : first_year) ++per_year[std::to_string(y)];
    long total = static_cast<long>(first_year.size());
    for (const auto& [year, c] : per_year)
        out.table.push_back({year, c, total == 0 ? 0.0 : static_cast<double>(c) / total});
    return out;
}

DistributionTable procedure_type_distribution(const std::vector<DrugAeAssociation>& rows) {
    std::map<std::string, long> counts;
    for (const auto& r : rows) ++counts[r.procedure.empty() ? "Unknown" : r.procedure];
    return counts_to_sorted_table(counts);
}

// --- serialization ---------------------------------------------------------------

std::string distribution_to_csv(const DistributionTable& table, const std::string& key_column) {
    std::vector<CsvRow> rows;
    rows.push_back({key_column, "count", "fraction"});
    for (const auto& r : table)
        rows.push_back({r.key, std::to_string(r.count), format_double(r.fraction)});
    return csv_to_string(rows);
}

std::string survival_to_csv(const SurvivalCurve& curve) {
    std::vector<CsvRow> rows;
    rows.push_back({"time_days", "at_risk", "events", "survival"});
    for (std::size_t i = 0; i < curve.times.size(); ++i)
        rows.push_back({std::to_string(curve.times[i]), std::to_string(curve.at_risk[i]),
                        std::to_string(curve.events[i]), format_double(curve.survival[i])});
    return csv_to_string(rows);
}

std::vector<fs::path> write_analytics(const std::vector<DrugAeAssociation>& rows,
                                      const std::vector<UpdateDuration>& durations,
                                      const std::set<std::string>& biologic_inns,
                                      int data_lock_year, const fs::path& out_dir, Log& log) {
    fs::create_directories(out_dir);
    std::vector<fs::path> written;
    auto emit = [&](const std::string& name, const std::string& content) {
        fs::path p = out_dir / name;
        write_file_if_changed(p, content);
        written.push_back(p);
    };

    emit("fig1a_cumulative_growth.csv",
         distribution_to_csv(cumulative_growth(rows, data_lock_year).table, "year"));
    emit("fig1b_annual_additions.csv",
         distribution_to_csv(annual_additions(rows, /*post_approval_only=*/true).table, "year"));
    emit("fig1c_procedure_types.csv",
         distribution_to_csv(procedure_type_distribution(rows), "procedure_type"));

    SurvivalCurve curve;
    bool have_curve = false;
    if (!durations.empty()) {
        curve = km_estimate(durations);
        have_curve = true;
        emit("fig1d_time_to_first_update.csv", survival_to_csv(curve));
    } else {
        log.warn("no_durations", "skipping the survival panel, no durations supplied", {});
        emit("fig1d_time_to_first_update.csv", survival_to_csv(SurvivalCurve{}));
    }

    emit("fig2a_new_pt_introduction.csv",
         distribution_to_csv(new_pt_introduction(rows).table, "year"));

    {
        std::vector<CsvRow> csv;
        csv.push_back({"soc", "cohort", "count", "fraction"});
        for (const auto& r : drug_type_comparison(rows, biologic_inns))
            csv.push_back({r.soc, r.cohort, std::to_string(r.count), format_double(r.fraction)});
        emit("fig2b_drug_type_comparison.csv", csv_to_string(csv));
    }

    emit("fig3a_atc_level1.csv", distribution_to_csv(atc_level1_distribution(rows), "atc_level1"));
    {
        std::vector<CsvRow> csv;
        csv.push_back({"soc", "source", "count", "fraction"});
        for (const auto& r : soc_source_split(rows))
            csv.push_back({r.soc, r.source, std::to_string(r.count), format_double(r.fraction)});
        emit("fig3b_soc_by_source.csv", csv_to_string(csv));
    }
    emit("fig3c_ubiquity.csv", distribution_to_csv(ubiquity(rows), "products_per_pt"));
    emit("fig3d_atc_hierarchy.csv",
         distribution_to_csv(atc_hierarchy_distribution(rows), "atc_level1_level2"));

    DensitySummary density = per_drug_density(rows);
    {
        std::vector<CsvRow> csv;
        csv.push_back({"product_id", "unique_pts"});
        for (const auto& [product, count] : density.pt_counts)
            csv.push_back({product, std::to_string(count)});
        emit("fig4a_pts_per_drug.csv", csv_to_string(csv));
    }
    {
        std::vector<CsvRow> csv;
        csv.push_back({"product_id", "distinct_socs"});
        for (const auto& [product, count] : density.soc_counts)
            csv.push_back({product, std::to_string(count)});
        emit("fig4b_socs_per_drug.csv", csv_to_string(csv));
    }

    // Headline metrics in one structured file.
    nlohmann::json summary;
    summary["total_associations"] = rows.size();
    {
        std::set<std::string> products, pts;
        for (const auto& r : rows) {
            products.insert(r.eu_num);
            pts.insert(pt_identity(r));
        }
        summary["products"] = products.size();
        summary["unique_pts"] = pts.size();
    }
    {
        nlohmann::json split = nlohmann::json::object();
        for (const auto& r : source_split(rows))
            split[r.key] = {{"count", r.count}, {"fraction", r.fraction}};
        summary["source_split"] = split;
    }
    summary["per_drug"] = {{"pt_median", density.pt_median}, {"pt_mean", density.pt_mean},
                           {"pt_q1", density.pt_q1},         {"pt_q3", density.pt_q3},
                           {"soc_median", density.soc_median}};
    {
        auto table = ubiquity(rows);
        summary["single_product_pt_fraction"] = table.empty() ? 0.0 : table.front().fraction;
    }
    if (have_curve && curve.median)
        summary["median_days_to_first_update"] = *curve.median;
    else
        summary["median_days_to_first_update"] = nullptr;

    fs::path summary_path = out_dir / "summary.json";
    write_file_if_changed(summary_path, summary.dump(2) + "\n");
    written.push_back(summary_path);

    log.info("analytics_written", "analytics tables written",
             {{"files", written.size()}, {"dir", out_dir.string()}});
    return written;
}

} // namespace aetrace
