#include "aetrace/meddra.hpp"

#include <algorithm>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace fs = std::filesystem;

namespace {

std::vector<std::vector<std::string>> read_asc_rows(const fs::path& file, Log& log) {
    if (!fs::exists(file))
        throw LoadError("hierarchy file " + file.string() + " is missing");
    std::string text = read_file(file);
    std::vector<std::vector<std::string>> rows;
    std::size_t line_no = 0;
    for (const auto& line : split(text, '\n')) {
        ++line_no;
        std::string stripped = trim(line);
        if (stripped.empty()) continue;
        auto fields = split(stripped, '$');
        for (auto& f : fields) f = trim(f);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty()) {
            log.warn("bad_asc_row", "skipping malformed row",
                     {{"file", file.filename().string()}, {"line", line_no}});
            continue;
        }
        rows.push_back(std::move(fields));
    }
    if (rows.empty())
        throw LoadError("hierarchy file " + file.string() + " contains no usable rows");
    return rows;
}

// Level files carry code$name; the last row bearing a code wins.
void load_level(const fs::path& file, std::map<std::string, std::string>& names, Log& log,
                std::vector<std::pair<std::string, std::string>>* ordered = nullptr) {
    for (const auto& row : read_asc_rows(file, log)) {
        if (ordered && !names.count(row[0])) ordered->emplace_back(row[0], row[1]);
        names[row[0]] = row[1];
    }
}

// Linkage files carry parent$child with an optional primary flag as the
// third field. Resolution to one parent per child follows the policy.
void load_linkage(const fs::path& file, AxialityPolicy policy,
                  std::map<std::string, std::string>& child_to_parent, Log& log) {
    std::set<std::string> primary_locked;
    for (const auto& row : read_asc_rows(file, log)) {
        const std::string& parent = row[0];
        const std::string& child = row[1];
        bool flagged = row.size() > 2 && equals_icase(row[2], "Y");
        switch (policy) {
        case AxialityPolicy::LastLoaded:
            child_to_parent[child] = parent;
            break;
        case AxialityPolicy::PrimaryFlag:
            if (flagged) {
                if (!primary_locked.insert(child).second) {
                    log.warn("duplicate_primary", "second primary-flagged row ignored",
                             {{"file", file.filename().string()}, {"child", child}});
                    break;
                }
                child_to_parent[child] = parent;
            } else if (!primary_locked.count(child)) {
                child_to_parent[child] = parent; // placeholder until a flagged row appears
            }
            break;
        }
    }
}

} // namespace

Hierarchy load_hierarchy(const fs::path& dir, AxialityPolicy policy, Log& log) {
    Hierarchy h;
    h.policy = policy;

    load_level(dir / "pt.asc", h.pt_names, log);
    load_level(dir / "hlt.asc", h.hlt_names, log);
    load_level(dir / "hlgt.asc", h.hlgt_names, log);
    load_level(dir / "soc.asc", h.soc_names, log, &h.soc_list);

    load_linkage(dir / "hlt_pt.asc", policy, h.pt_to_hlt, log);
    load_linkage(dir / "hlgt_hlt.asc", policy, h.hlt_to_hlgt, log);
    load_linkage(dir / "soc_hlgt.asc", policy, h.hlgt_to_soc, log);

    for (const auto& [code, name] : h.pt_names) h.pt_by_name[norm_key(name)] = code;

    std::size_t unresolved = 0;
    for (const auto& [pt, hlt] : h.pt_to_hlt) {
        auto hlgt_it = h.hlt_to_hlgt.find(hlt);
        if (hlgt_it == h.hlt_to_hlgt.end()) { ++unresolved; continue; }
        auto soc_it = h.hlgt_to_soc.find(hlgt_it->second);
        if (soc_it == h.hlgt_to_soc.end() || !h.soc_names.count(soc_it->second)) {
            ++unresolved;
            continue;
        }
        h.reverse_index[soc_it->second].insert(pt);
    }
    if (unresolved > 0)
        log.warn("unresolved_chains", "PT rows whose chain does not reach a loaded SOC",
                 {{"count", unresolved}});

    log.info("hierarchy_loaded", "hierarchy ready",
             {{"pts", h.pt_names.size()}, {"socs", h.soc_names.size()},
              {"policy", policy == AxialityPolicy::PrimaryFlag ? "primary_flag" : "last_loaded"}});
    return h;
}

std::optional<std::string> match_exact(const std::string& term, const Hierarchy& h) {
    auto it = h.pt_by_name.find(norm_key(term));
    if (it == h.pt_by_name.end()) return std::nullopt;
    return it->second;
}

HierarchyPath resolve_hierarchy(const std::string& pt_code, const Hierarchy& h) {
    auto need_name = [](const std::map<std::string, std::string>& names,
                        const std::string& code, const char* level) {
        auto it = names.find(code);
        if (it == names.end())
            throw HierarchyError(std::string(level) + " code " + code + " has no name entry");
        return it->second;
    };
    auto need_link = [](const std::map<std::string, std::string>& links,
                        const std::string& code, const char* from, const char* to) {
        auto it = links.find(code);
        if (it == links.end())
            throw HierarchyError(std::string(from) + " " + code + " has no " + to + " link");
        return it->second;
    };

    HierarchyPath path;
    path.pt_code = pt_code;
    path.pt_term = need_name(h.pt_names, pt_code, "PT");
    path.hlt_code = need_link(h.pt_to_hlt, pt_code, "PT", "HLT");
    path.hlt_term = need_name(h.hlt_names, path.hlt_code, "HLT");
    path.hlgt_code = need_link(h.hlt_to_hlgt, path.hlt_code, "HLT", "HLGT");
    path.hlgt_term = need_name(h.hlgt_names, path.hlgt_code, "HLGT");
    path.soc_code = need_link(h.hlgt_to_soc, path.hlgt_code, "HLGT", "SOC");
    path.soc_term = need_name(h.soc_names, path.soc_code, "SOC");
    return path;
}

// --- gateway-assisted passes ---------------------------------------------------

namespace {

std::string fill(std::string text, const std::string& placeholder, const std::string& value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos)
        throw ConfigError("prompt template is missing the " + placeholder + " placeholder");
    while (pos != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos = text.find(placeholder, pos + value.size());
    }
    return text;
}

// Flattens a CSV-ish gateway answer (commas and/or newlines) into trimmed,
// non-empty tokens in response order.
std::vector<std::string> response_tokens(const std::string& response) {
    std::vector<std::string> out;
    for (const auto& line : split(response, '\n'))
        for (const auto& piece : split(line, ','))
            if (std::string t = trim(piece); !t.empty()) out.push_back(std::move(t));
    return out;
}

} // namespace

std::vector<std::string> predict_socs(const std::string& term, TextModelGateway& gateway,
                                      const GatewayConfig& cfg, const Hierarchy& h,
                                      const std::string& prompt_template, Log& log) {
    std::vector<std::string> soc_name_lines;
    std::map<std::string, std::string> code_by_name;
    for (const auto& [code, name] : h.soc_list) {
        soc_name_lines.push_back(name);
        code_by_name[norm_key(name)] = code;
    }

    std::string prompt = fill(fill(prompt_template, "{{TERM}}", term), "{{SOC_LIST}}",
                              join(soc_name_lines, "\n"));
    std::string response = gateway.complete(cfg.system_prompt, prompt);

    std::vector<std::string> codes;
    for (const auto& token : response_tokens(response)) {
        auto it = code_by_name.find(norm_key(token));
        if (it == code_by_name.end()) {
            log.warn("unknown_soc", "predicted SOC is not in the loaded SOC list",
                     {{"term", term}, {"predicted", token}});
            continue;
        }
        if (std::find(codes.begin(), codes.end(), it->second) == codes.end())
            codes.push_back(it->second);
    }
    if (codes.size() > 3) {
        log.warn("soc_overflow", "more than three SOC predictions, keeping the first three",
                 {{"term", term}, {"returned", codes.size()}});
        codes.resize(3);
    }
    return codes;
}

namespace {

struct Candidate {
    std::string name;
    std::string code;
};

// Splits candidates into prompt-sized batches. The budget is a conservative
// three characters per context token; every batch keeps at least two
// candidates so successive rounds always shrink.
std::vector<std::vector<Candidate>> make_batches(const std::vector<Candidate>& pool,
                                                 std::size_t base_len, long max_context) {
    const std::size_t budget = static_cast<std::size_t>(max_context) * 3;
    std::vector<std::vector<Candidate>> batches;
    std::vector<Candidate> current;
    std::size_t current_len = base_len;
    for (const auto& c : pool) {
        std::size_t cost = c.name.size() + 1;
        if (!current.empty() && current.size() >= 2 && current_len + cost > budget) {
            batches.push_back(std::move(current));
            current.clear();
            current_len = base_len;
        }
        current_len += cost;
        current.push_back(c);
    }
    if (!current.empty()) batches.push_back(std::move(current));
    return batches;
}

std::optional<std::string> run_selection_rounds(const std::string& term,
                                                std::vector<Candidate> pool,
                                                TextModelGateway& gateway,
                                                const GatewayConfig& cfg,
                                                const std::string& prompt_template, Log& log) {
    const std::size_t base_len =
        fill(fill(prompt_template, "{{TERM}}", term), "{{CANDIDATES}}", "").size();

    while (true) {
        auto batches = make_batches(pool, base_len, cfg.max_context);
        std::vector<Candidate> winners;
        for (const auto& batch : batches) {
            std::vector<std::string> names;
            std::map<std::string, const Candidate*> by_key;
            for (const auto& c : batch) {
                names.push_back(c.name);
                by_key[norm_key(c.name)] = &c;
            }
            std::string prompt = fill(fill(prompt_template, "{{TERM}}", term), "{{CANDIDATES}}",
                                      join(names, "\n"));
            std::string answer = trim(gateway.complete(cfg.system_prompt, prompt));
            auto it = by_key.find(norm_key(answer));
            if (it == by_key.end()) {
                log.warn("invalid_selection", "selection is outside the candidate batch",
                         {{"term", term}, {"answer", answer}});
                continue;
            }
            winners.push_back(*it->second);
        }
        if (winners.empty()) return std::nullopt;
        if (winners.size() == 1) return winners.front().code;
        pool = std::move(winners); // batch winners meet in the next round
    }
}

} // namespace

std::optional<std::string> match_soc_filtered(const std::string& term,
                                              const std::vector<std::string>& soc_codes,
                                              TextModelGateway& gateway,
                                              const GatewayConfig& cfg, const Hierarchy& h,
                                              const std::string& prompt_template, Log& log) {
    std::set<std::string> pt_codes;
    for (const auto& soc : soc_codes) {
        auto it = h.reverse_index.find(soc);
        if (it == h.reverse_index.end()) continue;
        pt_codes.insert(it->second.begin(), it->second.end());
    }
    if (pt_codes.empty()) {
        log.info("empty_pool", "no candidate PTs under the predicted SOCs", {{"term", term}});
        return std::nullopt;
    }

    std::vector<Candidate> pool;
    for (const auto& code : pt_codes) {
        auto name_it = h.pt_names.find(code);
        if (name_it != h.pt_names.end()) pool.push_back({name_it->second, code});
    }
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.name < b.name; });

    return run_selection_rounds(term, std::move(pool), gateway, cfg, prompt_template, log);
}

// --- full two-pass mapping -----------------------------------------------------

std::string to_string(MatchMethod m) {
    switch (m) {
    case MatchMethod::ExactMatch: return "Exact Match";
    case MatchMethod::SocFilteredMatch: return "SOC-Filtered Match";
    case MatchMethod::Manual: return "Manual";
    case MatchMethod::Unmatched: return "Unmatched";
    case MatchMethod::Error: return "Error";
    }
    throw std::logic_error("unreachable match method");
}

MatchMethod match_method_from_string(const std::string& s) {
    if (s == "Exact Match") return MatchMethod::ExactMatch;
    if (s == "SOC-Filtered Match") return MatchMethod::SocFilteredMatch;
    if (s == "Manual") return MatchMethod::Manual;
    if (s == "Unmatched") return MatchMethod::Unmatched;
    if (s == "Error") return MatchMethod::Error;
    throw ParseError("unknown match method '" + s + "'");
}

namespace {

MappedTerm from_path(const std::string& raw, const HierarchyPath& p, MatchMethod method) {
    MappedTerm m;
    m.raw_term = raw;
    m.pt_term = p.pt_term;
    m.pt_code = p.pt_code;
    m.hlt_term = p.hlt_term;
    m.hlt_code = p.hlt_code;
    m.hlgt_term = p.hlgt_term;
    m.hlgt_code = p.hlgt_code;
    m.soc_term = p.soc_term;
    m.soc_code = p.soc_code;
    m.method = method;
    return m;
}

} // namespace

MappedTerm map_term(const std::string& term, const Hierarchy& h, TextModelGateway& gateway,
                    const GatewayConfig& cfg, const MappingPrompts& prompts, Log& log) {
    MappedTerm out;
    out.raw_term = term;

    if (auto exact = match_exact(term, h)) {
        try {
            return from_path(term, resolve_hierarchy(*exact, h), MatchMethod::ExactMatch);
        } catch (const HierarchyError& e) {
            log.warn("hierarchy_gap", e.what(), {{"term", term}, {"pt_code", *exact}});
            out.pt_code = *exact;
            out.pt_term = h.pt_names.count(*exact) ? h.pt_names.at(*exact) : "";
            out.method = MatchMethod::Error;
            return out;
        }
    }

    try {
        auto socs = predict_socs(term, gateway, cfg, h, prompts.predict_socs, log);
        if (socs.empty()) {
            out.method = MatchMethod::Unmatched;
            return out;
        }
        auto pt = match_soc_filtered(term, socs, gateway, cfg, h, prompts.select_pt, log);
        if (!pt) {
            out.method = MatchMethod::Unmatched;
            return out;
        }
        try {
            return from_path(term, resolve_hierarchy(*pt, h), MatchMethod::SocFilteredMatch);
        } catch (const HierarchyError& e) {
            log.warn("hierarchy_gap", e.what(), {{"term", term}, {"pt_code", *pt}});
            out.pt_code = *pt;
            out.pt_term = h.pt_names.count(*pt) ? h.pt_names.at(*pt) : "";
            out.method = MatchMethod::Error;
            return out;
        }
    } catch (const GatewayError& e) {
        log.error("gateway_failed", e.what(), {{"term", term}});
        out.method = MatchMethod::Error;
        return out;
    } catch (const ResponseFormatError& e) {
        log.error("gateway_bad_response", e.what(), {{"term", term}});
        out.method = MatchMethod::Error;
        return out;
    }
}

// --- mapping table round trip ----------------------------------------------------

const CsvRow kMappingHeader = {"raw_term", "pt_term",   "pt_code",  "hlt_term",
                               "hlt_code", "hlgt_term", "hlgt_code", "soc_term",
                               "soc_code", "match_method"};

std::string mapping_to_csv(const std::vector<MappedTerm>& rows) {
    std::vector<CsvRow> csv;
    csv.push_back(kMappingHeader);
    for (const auto& m : rows)
        csv.push_back({m.raw_term, m.pt_term, m.pt_code, m.hlt_term, m.hlt_code, m.hlgt_term,
                       m.hlgt_code, m.soc_term, m.soc_code, to_string(m.method)});
    return csv_to_string(csv);
}

std::vector<MappedTerm> mapping_from_csv(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw ParseError("mapping table is empty");
    if (rows.front() != kMappingHeader)
        throw ParseError("mapping table header does not match the expected schema");
    std::vector<MappedTerm> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kMappingHeader.size())
            throw ParseError("mapping row " + std::to_string(i + 1) +
                             " has the wrong field count");
        MappedTerm m;
        m.raw_term = r[0];
        m.pt_term = r[1];
        m.pt_code = r[2];
        m.hlt_term = r[3];
        m.hlt_code = r[4];
        m.hlgt_term = r[5];
        m.hlgt_code = r[6];
        m.soc_term = r[7];
        m.soc_code = r[8];
        m.method = match_method_from_string(r[9]);
        out.push_back(std::move(m));
    }
    return out;
}

} // namespace aetrace
