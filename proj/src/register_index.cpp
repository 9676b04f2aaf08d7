#include "aetrace/register_index.hpp"

#include <map>

#include "aetrace/errors.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

EuNumber parse_eu_number(const std::string& text) {
    const std::string t = trim(text);
    // EU/1/YY/NNN with a 2-digit year and a 1-4 digit sequential number.
    auto fail = [&] { throw ParseError("malformed EU number: '" + t + "'"); };

    if (t.size() < 9 || t.compare(0, 5, "EU/1/") != 0) fail();
    if (!(t[5] >= '0' && t[5] <= '9') || !(t[6] >= '0' && t[6] <= '9') || t[7] != '/') fail();

    const std::string nnn = t.substr(8);
    if (nnn.empty() || nnn.size() > 4) fail();
    for (char c : nnn)
        if (c < '0' || c > '9') fail();

    EuNumber out;
    out.year = (t[5] - '0') * 10 + (t[6] - '0');
    out.nnn = std::stoi(nnn);
    return out;
}

std::string build_product_url(int nnn) {
    if (nnn < 1) throw ParseError("h-number must be positive, got " + std::to_string(nnn));
    return "https://ec.europa.eu/health/documents/community-register/html/h" +
           std::to_string(nnn) + ".htm";
}

std::vector<IndexEntry> parse_brand_index(const std::vector<CsvRow>& rows,
                                          const BrandIndexOptions& opts, Log& log) {
    std::vector<IndexEntry> out;
    if (rows.empty()) return out;

    const size_t header_idx = size_t(opts.header_row - 1);
    if (rows.size() <= header_idx) {
        log.warn("index_too_short", "brand index has no header row",
                 {{"rows", rows.size()}, {"header_row", opts.header_row}});
        return out;
    }

    const CsvRow& header = rows[header_idx];
    const int brand_col = find_column(header, opts.brand_column);
    const int cat_col = find_column(header, opts.category_column);
    const int eu_col = find_column(header, opts.eu_number_column);
    if (brand_col < 0 || cat_col < 0 || eu_col < 0)
        throw ParseError("brand index header is missing required columns (" +
                         opts.brand_column + ", " + opts.category_column + ", " +
                         opts.eu_number_column + ")");

    auto cell = [](const CsvRow& row, int col) -> std::string {
        return col >= 0 && size_t(col) < row.size() ? trim(row[size_t(col)]) : std::string();
    };

    for (size_t i = header_idx + 1; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (row.empty()) continue;
        const std::string category = cell(row, cat_col);
        if (category != "CH") continue; // human centrally authorised only

        IndexEntry entry;
        entry.brand_name = cell(row, brand_col);
        entry.category_code = category;
        entry.eu_number = cell(row, eu_col);
        try {
            EuNumber eu = parse_eu_number(entry.eu_number);
            if (eu.nnn < 1) throw ParseError("sequential number must be positive");
            entry.h_number = eu.nnn;
            entry.register_url = build_product_url(eu.nnn);
        } catch (const ParseError& e) {
            log.warn("bad_eu_number", e.what(),
                     {{"row", i + 1}, {"brand", entry.brand_name}, {"eu", entry.eu_number}});
            continue;
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::vector<EmaReportRow> parse_ema_report(const std::vector<CsvRow>& rows,
                                           const EmaReportOptions& opts, Log& log) {
    std::vector<EmaReportRow> out;
    const size_t header_idx = size_t(opts.header_row - 1);
    if (rows.size() <= header_idx) return out;

    const CsvRow& header = rows[header_idx];
    const int brand_col = find_column(header, opts.brand_column);
    if (brand_col < 0)
        throw ParseError("agency report header is missing column '" + opts.brand_column + "'");
    const int inn_col = find_column(header, opts.inn_column);
    const int atc_col = find_column(header, opts.atc_column);
    const int mah_col = find_column(header, opts.mah_column);
    const int approval_col = find_column(header, opts.approval_column);
    const int area_col = find_column(header, opts.area_column);

    auto cell = [](const CsvRow& row, int col) -> std::string {
        return col >= 0 && size_t(col) < row.size() ? trim(row[size_t(col)]) : std::string();
    };

    for (size_t i = header_idx + 1; i < rows.size(); ++i) {
        const CsvRow& row = rows[i];
        if (row.empty()) continue;
        EmaReportRow rec;
        rec.brand_name = cell(row, brand_col);
        if (rec.brand_name.empty()) continue;
        rec.inn = cell(row, inn_col);
        rec.atc_code = cell(row, atc_col);
        rec.mah = cell(row, mah_col);
        rec.therapeutic_area = cell(row, area_col);
        const std::string approval_raw = cell(row, approval_col);
        if (!approval_raw.empty()) {
            if (auto d = Date::parse(approval_raw)) {
                rec.approval_date = d->to_iso();
            } else {
                log.warn("bad_approval_date", "unparseable authorisation date",
                         {{"brand", rec.brand_name}, {"value", approval_raw}});
            }
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::vector<EnrichedProduct> join_with_ema_report(const std::vector<IndexEntry>& entries,
                                                  const std::vector<EmaReportRow>& report,
                                                  Log& log) {
    // First occurrence wins on duplicate brand keys; kept deterministic and
    // auditable via the warning record.
    std::map<std::string, const EmaReportRow*> by_brand;
    for (const auto& row : report) {
        const std::string key = norm_key(row.brand_name);
        auto [it, inserted] = by_brand.emplace(key, &row);
        if (!inserted)
            log.warn("duplicate_report_brand", "duplicate brand key in agency report, first kept",
                     {{"brand", row.brand_name}});
    }

    std::vector<EnrichedProduct> out;
    out.reserve(entries.size());
    for (const auto& entry : entries) {
        EnrichedProduct product;
        product.entry = entry;
        auto it = by_brand.find(norm_key(entry.brand_name));
        if (it == by_brand.end()) {
            log.warn("unmatched_brand", "no agency report row for brand",
                     {{"brand", entry.brand_name}, {"eu", entry.eu_number}});
        } else {
            const EmaReportRow& row = *it->second;
            product.inn = row.inn;
            product.atc_code = row.atc_code;
            product.mah = row.mah;
            product.approval_date = row.approval_date;
            product.therapeutic_area = row.therapeutic_area;
        }
        out.push_back(std::move(product));
    }
    return out;
}

const CsvRow kProductListHeader = {"brand",    "eu_number", "h_number",
                                   "url",      "inn",       "atc",
                                   "mah",      "approval_date", "therapeutic_area"};

std::vector<CsvRow> product_list_to_csv(const std::vector<EnrichedProduct>& products) {
    std::vector<CsvRow> rows;
    rows.push_back(kProductListHeader);
    for (const auto& p : products) {
        rows.push_back({p.entry.brand_name, p.entry.eu_number, std::to_string(p.entry.h_number),
                        p.entry.register_url, p.inn, p.atc_code, p.mah, p.approval_date,
                        p.therapeutic_area});
    }
    return rows;
}

std::vector<EnrichedProduct> product_list_from_csv(const std::vector<CsvRow>& rows) {
    std::vector<EnrichedProduct> out;
    if (rows.empty()) return out;
    if (rows[0] != kProductListHeader)
        throw ParseError("product list header does not match the expected column order");
    for (size_t i = 1; i < rows.size(); ++i) {
        const CsvRow& r = rows[i];
        if (r.size() != kProductListHeader.size())
            throw ParseError("product list row " + std::to_string(i + 1) + " has " +
                             std::to_string(r.size()) + " fields");
        EnrichedProduct p;
        p.entry.brand_name = r[0];
        p.entry.eu_number = r[1];
        p.entry.category_code = "CH";
        p.entry.h_number = std::stoi(r[2]);
        p.entry.register_url = r[3];
        p.inn = r[4];
        p.atc_code = r[5];
        p.mah = r[6];
        p.approval_date = r[7];
        p.therapeutic_area = r[8];
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace aetrace
