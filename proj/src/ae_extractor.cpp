#include "aetrace/ae_extractor.hpp"

#include <regex>
#include <set>

#include <json.hpp>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace {

std::string replace_placeholder(std::string text, const std::string& placeholder,
                                const std::string& value) {
    auto pos = text.find(placeholder);
    if (pos == std::string::npos)
        throw ConfigError("prompt template is missing the " + placeholder + " placeholder");
    while (pos != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos = text.find(placeholder, pos + value.size());
    }
    return text;
}

} // namespace

std::string build_extraction_prompt(const std::string& prompt_template,
                                    const std::string& section_text) {
    return replace_placeholder(prompt_template, "{{SECTION_TEXT}}", section_text);
}

std::vector<RawAeTerm> extract_aes(const std::string& section_text, const std::string& product_id,
                                   const std::string& version_date,
                                   const std::string& source_file, TextModelGateway& gateway,
                                   const GatewayConfig& cfg, const std::string& prompt_template,
                                   Log& log) {
    if (trim(section_text).empty()) {
        log.info("extract_skip_empty", "section text empty, gateway not consulted",
                 {{"product_id", product_id}, {"version_date", version_date}});
        return {};
    }

    const std::string prompt = build_extraction_prompt(prompt_template, section_text);
    const std::string response = gateway.complete(cfg.system_prompt, prompt);

    std::vector<CsvRow> rows;
    try {
        rows = parse_csv(response);
    } catch (const ParseError& e) {
        log.error("extract_bad_response", e.what(),
                  {{"product_id", product_id}, {"response", response}});
        throw ResponseFormatError("gateway returned a response that does not parse as CSV: " +
                                  std::string(e.what()));
    }

    // The model answers with a CSV list; tolerate both one-term-per-row and
    // several-terms-per-row shapes by flattening in row-major order.
    std::vector<RawAeTerm> out;
    for (const auto& row : rows) {
        for (const auto& cell : row) {
            std::string term = trim(cell);
            if (term.empty()) continue;
            out.push_back({term, product_id, version_date, source_file});
        }
    }
    log.info("extract_done", "parsed gateway response",
             {{"product_id", product_id}, {"version_date", version_date},
              {"terms", out.size()}});
    return out;
}

// --- cleaning ----------------------------------------------------------------

CleanRules load_clean_rules(const std::filesystem::path& json_file) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_file(json_file));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("clean rules file " + json_file.string() + " is not valid JSON: " +
                          e.what());
    }
    CleanRules rules;
    rules.strip_parentheticals = doc.value("strip_parentheticals", true);
    for (const auto& p : doc.value("strip_patterns", nlohmann::json::array()))
        rules.strip_patterns.push_back(p.get<std::string>());
    for (const auto& q : doc.value("trailing_qualifiers", nlohmann::json::array()))
        rules.trailing_qualifiers.push_back(q.get<std::string>());
    return rules;
}

namespace {

std::string drop_parentheticals(const std::string& text) {
    std::string out;
    int depth = 0;
    for (char c : text) {
        if (c == '(') {
            ++depth;
        } else if (c == ')') {
            if (depth > 0) --depth;
        } else if (depth == 0) {
            out.push_back(c);
        }
    }
    return out;
}

bool ends_with_icase(const std::string& text, const std::string& suffix) {
    if (suffix.size() > text.size()) return false;
    return equals_icase(text.substr(text.size() - suffix.size()), suffix);
}

// Peels one trailing qualifier (plus any separator punctuation before it);
// returns true when something was removed.
bool strip_one_qualifier(std::string& text, const std::vector<std::string>& qualifiers) {
    for (const auto& q : qualifiers) {
        if (q.empty() || !ends_with_icase(text, q)) continue;
        std::size_t cut = text.size() - q.size();
        // Require a separator before the qualifier so "common" never eats the
        // tail of a term like "megacommon" (and a bare qualifier clears).
        if (cut > 0) {
            char before = text[cut - 1];
            if (before != ' ' && before != '\t' && before != ':' && before != ';' &&
                before != ',' && before != '-')
                continue;
        }
        while (cut > 0 && (text[cut - 1] == ' ' || text[cut - 1] == '\t' ||
                           text[cut - 1] == ':' || text[cut - 1] == ';' ||
                           text[cut - 1] == ',' || text[cut - 1] == '-'))
            --cut;
        text.erase(cut);
        return true;
    }
    return false;
}

} // namespace

std::string clean_term_text(const std::string& text, const CleanRules& rules) {
    std::string out = text;
    if (rules.strip_parentheticals) out = drop_parentheticals(out);
    for (const auto& pattern : rules.strip_patterns) {
        try {
            std::regex re(pattern, std::regex::icase);
            out = std::regex_replace(out, re, "");
        } catch (const std::regex_error& e) {
            throw ConfigError("clean rule pattern '" + pattern + "' is not a valid regex: " +
                              e.what());
        }
    }
    out = collapse_ws(out);
    while (strip_one_qualifier(out, rules.trailing_qualifiers))
        out = collapse_ws(out);
    return out;
}

std::vector<RawAeTerm> clean_terms(const std::vector<RawAeTerm>& terms, const CleanRules& rules,
                                   Log& log) {
    std::vector<RawAeTerm> out;
    std::set<std::string> seen; // norm_key(text) | product | version
    for (const auto& t : terms) {
        std::string cleaned = clean_term_text(t.text, rules);
        if (cleaned.empty()) {
            log.info("clean_dropped", "term cleaned down to nothing",
                     {{"raw", t.text}, {"product_id", t.product_id}});
            continue;
        }
        std::string key = norm_key(cleaned) + "|" + t.product_id + "|" + t.version_date;
        if (!seen.insert(key).second) continue; // first occurrence wins
        out.push_back({cleaned, t.product_id, t.version_date, t.source_file});
    }
    return out;
}

// --- CSV round trip ------------------------------------------------------------

const CsvRow kParsedAeHeader = {"term", "product_id", "version_date", "source_file"};

std::string aes_to_csv(const std::vector<RawAeTerm>& terms) {
    std::vector<CsvRow> rows;
    rows.push_back(kParsedAeHeader);
    for (const auto& t : terms)
        rows.push_back({t.text, t.product_id, t.version_date, t.source_file});
    return csv_to_string(rows);
}

std::vector<RawAeTerm> aes_from_csv(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw ParseError("parsed-AE file is empty");
    if (rows.front() != kParsedAeHeader)
        throw ParseError("parsed-AE file header does not match the expected schema");
    std::vector<RawAeTerm> out;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() != kParsedAeHeader.size())
            throw ParseError("parsed-AE row " + std::to_string(i + 1) +
                             " has the wrong field count");
        out.push_back({r[0], r[1], r[2], r[3]});
    }
    return out;
}

} // namespace aetrace
