#include "aetrace/register_scraper.hpp"

#include <algorithm>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace {

// Balanced-brace scan that is aware of JSON string literals and escapes.
std::optional<std::string> balanced_json(const std::string& text, size_t start) {
    if (start >= text.size()) return std::nullopt;
    char open = text[start];
    char close;
    if (open == '{') close = '}';
    else if (open == '[') close = ']';
    else return std::nullopt;

    int depth = 0;
    bool in_string = false;
    for (size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == open) ++depth;
        else if (c == close) {
            if (--depth == 0) return text.substr(start, i - start + 1);
        }
    }
    return std::nullopt;
}

std::string get_string(const nlohmann::json& obj, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) return "";
    if (it->is_string()) return trim(it->get<std::string>());
    return it->dump();
}

std::string normalize_date_field(const std::string& raw, const std::string& what, Log& log) {
    if (raw.empty()) return "";
    if (auto d = Date::parse(raw)) return d->to_iso();
    log.warn("bad_date", "unparseable " + what + " left empty", {{"value", raw}});
    return "";
}

} // namespace

std::optional<std::pair<std::string, size_t>> extract_script_variable(const std::string& html,
                                                                      const std::string& name) {
    const std::string needle = "var " + name;
    size_t pos = 0;
    while ((pos = html.find(needle, pos)) != std::string::npos) {
        size_t cursor = pos + needle.size();
        while (cursor < html.size() && (html[cursor] == ' ' || html[cursor] == '\t')) ++cursor;
        if (cursor >= html.size() || html[cursor] != '=') {
            pos += needle.size();
            continue;
        }
        ++cursor;
        while (cursor < html.size() && std::isspace(static_cast<unsigned char>(html[cursor])))
            ++cursor;
        auto doc = balanced_json(html, cursor);
        if (!doc)
            throw DecodeError("unbalanced script data for '" + name + "' at byte offset " +
                              std::to_string(cursor));
        return std::make_pair(*doc, cursor);
    }
    return std::nullopt;
}

std::pair<ProductMetadata, std::vector<ProcedureRecord>>
parse_product_page(const std::string& html, const PageSelectors& selectors, Log& log) {
    if (html.empty()) throw StructureError("empty page");

    auto product_block = extract_script_variable(html, selectors.product_var);
    if (!product_block)
        throw StructureError("no embedded '" + selectors.product_var + "' data block found");

    nlohmann::json product_doc;
    try {
        product_doc = nlohmann::json::parse(product_block->first);
    } catch (const nlohmann::json::parse_error& e) {
        throw DecodeError("malformed product data at byte offset " +
                          std::to_string(product_block->second + e.byte - 1) + ": " + e.what());
    }

    ProductMetadata meta;
    meta.brand_name = get_string(product_doc, selectors.key_name);
    meta.eu_number = get_string(product_doc, selectors.key_eu_number);
    meta.inn = get_string(product_doc, selectors.key_inn);
    meta.mah = get_string(product_doc, selectors.key_mah);
    meta.indication = get_string(product_doc, selectors.key_indication);
    meta.status = get_string(product_doc, selectors.key_status);
    meta.page_url = get_string(product_doc, selectors.key_url);
    if (auto it = product_doc.find(selectors.key_atc); it != product_doc.end() && !it->is_null())
        meta.atc_raw = it->is_string() ? it->get<std::string>() : it->dump();

    std::vector<ProcedureRecord> procedures;
    auto proc_block = extract_script_variable(html, selectors.procedures_var);
    if (proc_block) {
        nlohmann::json proc_doc;
        try {
            proc_doc = nlohmann::json::parse(proc_block->first);
        } catch (const nlohmann::json::parse_error& e) {
            throw DecodeError("malformed procedure data at byte offset " +
                              std::to_string(proc_block->second + e.byte - 1) + ": " + e.what());
        }
        if (!proc_doc.is_array())
            throw DecodeError("procedure data at byte offset " +
                              std::to_string(proc_block->second) + " is not a list");
        for (const auto& item : proc_doc) {
            ProcedureRecord rec;
            rec.procedure_id = get_string(item, selectors.key_proc_id);
            rec.procedure_type = get_string(item, selectors.key_proc_type);
            rec.ema_number = get_string(item, selectors.key_proc_ema);
            rec.decision_number = get_string(item, selectors.key_proc_decision_number);
            rec.decision_date =
                normalize_date_field(get_string(item, selectors.key_proc_decision_date),
                                     "decision date", log);
            rec.close_date = normalize_date_field(get_string(item, selectors.key_proc_close),
                                                  "closing date", log);
            rec.document_link = get_string(item, selectors.key_proc_link);
            procedures.push_back(std::move(rec));
        }
    } else {
        log.warn("no_procedures", "page has no embedded procedure list");
    }

    // Ascending by close date, page order preserved on ties; undated records
    // sort last so dated history stays contiguous.
    std::stable_sort(procedures.begin(), procedures.end(),
                     [](const ProcedureRecord& a, const ProcedureRecord& b) {
                         if (a.close_date.empty() != b.close_date.empty())
                             return !a.close_date.empty();
                         return a.close_date < b.close_date;
                     });
    return {std::move(meta), std::move(procedures)};
}

const CsvRow kProceduresHeader = {"procedure_id",  "procedure_type", "ema_number",
                                  "decision_number", "decision_date", "close_date",
                                  "document_link"};

std::vector<CsvRow> procedures_to_csv(const std::vector<ProcedureRecord>& procedures) {
    std::vector<CsvRow> rows{kProceduresHeader};
    for (const auto& p : procedures)
        rows.push_back({p.procedure_id, p.procedure_type, p.ema_number, p.decision_number,
                        p.decision_date, p.close_date, p.document_link});
    return rows;
}

std::vector<ProcedureRecord> procedures_from_csv(const std::vector<CsvRow>& rows) {
    std::vector<ProcedureRecord> out;
    if (rows.empty()) return out;
    if (rows[0] != kProceduresHeader) throw ParseError("unexpected procedures file header");
    for (size_t i = 1; i < rows.size(); ++i) {
        const CsvRow& r = rows[i];
        if (r.size() != kProceduresHeader.size())
            throw ParseError("procedures row " + std::to_string(i + 1) + " is malformed");
        out.push_back({r[0], r[1], r[2], r[3], r[4], r[5], r[6]});
    }
    return out;
}

nlohmann::json metadata_to_json(const ProductMetadata& meta) {
    return nlohmann::json{{"brand_name", meta.brand_name}, {"eu_number", meta.eu_number},
                          {"inn", meta.inn},               {"mah", meta.mah},
                          {"indication", meta.indication}, {"atc_raw", meta.atc_raw},
                          {"page_url", meta.page_url},     {"status", meta.status}};
}

ProductMetadata metadata_from_json(const nlohmann::json& doc) {
    ProductMetadata meta;
    meta.brand_name = doc.value("brand_name", "");
    meta.eu_number = doc.value("eu_number", "");
    meta.inn = doc.value("inn", "");
    meta.mah = doc.value("mah", "");
    meta.indication = doc.value("indication", "");
    meta.atc_raw = doc.value("atc_raw", "");
    meta.page_url = doc.value("page_url", "");
    meta.status = doc.value("status", "");
    return meta;
}

} // namespace aetrace
