#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aetrace/csv.hpp"
#include "aetrace/dates.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

// One retained row of the Union Register brand index. Only centrally
// authorised human products (category "CH") are kept.
struct IndexEntry {
    std::string brand_name;
    std::string category_code; // always "CH" after filtering
    std::string eu_number;     // EU/1/YY/NNN
    int h_number = 0;          // sequential product number, drives the page URL
    std::string register_url;
};

struct EmaReportRow {
    std::string brand_name;
    std::string inn;
    std::string atc_code;
    std::string mah;
    std::string approval_date; // ISO once parsed; empty when absent
    std::string therapeutic_area;
};

// Index entry plus the matched agency report fields; enrichment stays empty
// when no report row matched.
struct EnrichedProduct {
    IndexEntry entry;
    std::string inn;
    std::string atc_code;
    std::string mah;
    std::string approval_date;
    std::string therapeutic_area;
};

struct EuNumber {
    int year = 0; // two-digit year as printed
    int nnn = 0;  // sequential number, leading zeros discarded
};

EuNumber parse_eu_number(const std::string& text); // throws ParseError

std::string build_product_url(int nnn); // pre: nnn >= 1

struct BrandIndexOptions {
    // The source workbook carries two banner rows; the header is the third
    // physical row. Overridable because the export layout may change.
    int header_row = 3; // 1-based
    std::string brand_column = "Product Name";
    std::string category_column = "Category";
    std::string eu_number_column = "EU Number";
};

std::vector<IndexEntry> parse_brand_index(const std::vector<CsvRow>& rows,
                                          const BrandIndexOptions& opts = {},
                                          Log& log = null_log());

struct EmaReportOptions {
    std::string brand_column = "Medicine name";
    std::string inn_column = "INN";
    std::string atc_column = "ATC code";
    std::string mah_column = "Marketing authorisation holder";
    std::string approval_column = "Marketing authorisation date";
    std::string area_column = "Therapeutic area";
    int header_row = 1; // 1-based
};

std::vector<EmaReportRow> parse_ema_report(const std::vector<CsvRow>& rows,
                                           const EmaReportOptions& opts = {},
                                           Log& log = null_log());

// Case-insensitive brand-name join. Every entry is retained; duplicate report
// keys resolve to the first occurrence with a logged warning.
std::vector<EnrichedProduct> join_with_ema_report(const std::vector<IndexEntry>& entries,
                                                  const std::vector<EmaReportRow>& report,
                                                  Log& log = null_log());

// Stable column order of the enriched product list file.
extern const CsvRow kProductListHeader;

std::vector<CsvRow> product_list_to_csv(const std::vector<EnrichedProduct>& products);
std::vector<EnrichedProduct> product_list_from_csv(const std::vector<CsvRow>& rows);

} // namespace aetrace
