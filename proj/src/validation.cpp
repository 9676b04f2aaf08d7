#include "aetrace/validation.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

std::string to_string(VerdictCategory c) {
    switch (c) {
    case VerdictCategory::Correct: return "Correct";
    case VerdictCategory::Incorrect: return "Incorrect";
    case VerdictCategory::Missing: return "Missing";
    case VerdictCategory::Duplicate: return "Duplicate";
    case VerdictCategory::Triplicate: return "Triplicate";
    }
    throw std::logic_error("unreachable verdict category");
}

std::vector<Verdict> judge(const std::vector<std::string>& extracted,
                           const std::vector<std::string>& gold) {
    // Normalized occurrence counts, remembering first-seen order and wording.
    std::vector<std::string> extracted_order;
    std::map<std::string, std::size_t> occurrences;
    std::map<std::string, std::string> display;
    for (const auto& e : extracted) {
        std::string key = norm_key(e);
        if (key.empty()) continue;
        if (++occurrences[key] == 1) {
            extracted_order.push_back(key);
            display[key] = trim(e);
        }
    }

    std::vector<std::string> gold_order;
    std::map<std::string, std::string> gold_display;
    for (const auto& g : gold) {
        std::string key = norm_key(g);
        if (key.empty() || gold_display.count(key)) continue;
        gold_order.push_back(key);
        gold_display[key] = trim(g);
    }

    std::vector<Verdict> verdicts;
    for (const auto& key : gold_order) {
        bool present = occurrences.count(key) > 0;
        verdicts.push_back({gold_display[key], present ? VerdictCategory::Correct
                                                       : VerdictCategory::Missing});
    }
    for (const auto& key : extracted_order)
        if (!gold_display.count(key))
            verdicts.push_back({display[key], VerdictCategory::Incorrect});
    // Extra occurrences add one verdict per term: Duplicate for exactly two,
    // Triplicate covering three or more.
    for (const auto& key : extracted_order) {
        std::size_t n = occurrences[key];
        if (n == 2) verdicts.push_back({display[key], VerdictCategory::Duplicate});
        else if (n >= 3) verdicts.push_back({display[key], VerdictCategory::Triplicate});
    }
    return verdicts;
}

std::map<VerdictCategory, std::size_t> verdict_counts(const std::vector<Verdict>& verdicts) {
    std::map<VerdictCategory, std::size_t> counts;
    for (const auto& v : verdicts) ++counts[v.category];
    return counts;
}

double accuracy(const std::vector<Verdict>& verdicts) {
    if (verdicts.empty())
        throw ValidationError("accuracy is undefined on an empty verdict list");
    std::size_t correct = 0;
    for (const auto& v : verdicts)
        if (v.category == VerdictCategory::Correct) ++correct;
    return static_cast<double>(correct) / static_cast<double>(verdicts.size());
}

MappingBreakdown mapping_breakdown(const std::vector<MappedTerm>& mapped_terms) {
    MappingBreakdown out;
    std::set<std::string> seen;
    for (const auto& m : mapped_terms) {
        if (!seen.insert(norm_key(m.raw_term)).second) continue; // unique terms only
        ++out.counts[m.method];
        ++out.total;
    }
    if (out.total == 0) return out;
    for (const auto& [method, count] : out.counts)
        out.fractions[method] = static_cast<double>(count) / static_cast<double>(out.total);
    for (auto method : {MatchMethod::ExactMatch, MatchMethod::SocFilteredMatch,
                        MatchMethod::Manual})
        if (auto it = out.fractions.find(method); it != out.fractions.end())
            out.success += it->second;
    return out;
}

ManualOverrides load_overrides(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    ManualOverrides out;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (i == 0 && !r.empty() && equals_icase(r[0], "term")) continue; // header
        if (r.size() < 2)
            throw ParseError("override row " + std::to_string(i + 1) + " needs term,pt_code");
        out.emplace_back(trim(r[0]), trim(r[1]));
    }
    return out;
}

std::vector<MappedTerm> apply_manual_overrides(std::vector<MappedTerm> mapping,
                                               const ManualOverrides& overrides,
                                               const Hierarchy& h, Log& log) {
    std::vector<std::string> unknown;
    for (const auto& [term, code] : overrides)
        if (!h.pt_names.count(code)) unknown.push_back(code);
    if (!unknown.empty())
        throw ValidationError("override PT codes not in the loaded hierarchy: " +
                              join(unknown, ", "));

    std::map<std::string, std::string> by_term;
    for (const auto& [term, code] : overrides) by_term[norm_key(term)] = code;

    for (auto& row : mapping) {
        auto it = by_term.find(norm_key(row.raw_term));
        if (it == by_term.end()) continue;
        HierarchyPath p = resolve_hierarchy(it->second, h);
        row.pt_term = p.pt_term;
        row.pt_code = p.pt_code;
        row.hlt_term = p.hlt_term;
        row.hlt_code = p.hlt_code;
        row.hlgt_term = p.hlgt_term;
        row.hlgt_code = p.hlgt_code;
        row.soc_term = p.soc_term;
        row.soc_code = p.soc_code;
        row.method = MatchMethod::Manual;
        log.info("manual_override", "term remapped by reviewer override",
                 {{"term", row.raw_term}, {"pt_code", p.pt_code}});
    }
    return mapping;
}

std::string report_to_json(const ValidationReport& report) {
    nlohmann::json doc;
    nlohmann::json cats = nlohmann::json::object();
    for (auto c : {VerdictCategory::Correct, VerdictCategory::Incorrect,
                   VerdictCategory::Missing, VerdictCategory::Duplicate,
                   VerdictCategory::Triplicate}) {
        auto it = report.category_counts.find(c);
        cats[to_string(c)] = it == report.category_counts.end() ? 0 : it->second;
    }
    doc["categories"] = cats;
    doc["judged_items"] = report.judged_items;
    doc["extraction_accuracy"] = report.extraction_accuracy;
    // The accuracy denominator counts every verdict, including Duplicate and
    // Triplicate; stated here because reviewers may count differently.
    doc["accuracy_formula"] = "Correct / (Correct+Incorrect+Missing+Duplicate+Triplicate)";

    nlohmann::json mapping = nlohmann::json::object();
    for (auto m : {MatchMethod::ExactMatch, MatchMethod::SocFilteredMatch, MatchMethod::Manual,
                   MatchMethod::Unmatched, MatchMethod::Error}) {
        auto c = report.mapping.counts.find(m);
        auto f = report.mapping.fractions.find(m);
        mapping[to_string(m)] = {
            {"count", c == report.mapping.counts.end() ? 0 : c->second},
            {"fraction", f == report.mapping.fractions.end() ? 0.0 : f->second},
        };
    }
    doc["mapping"] = mapping;
    doc["mapping_success"] = report.mapping.success;
    doc["unique_terms"] = report.mapping.total;
    return doc.dump(2) + "\n";
}

} // namespace aetrace
