#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "aetrace/csv.hpp"
#include "aetrace/dates.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

struct ProductMetadata {
    std::string brand_name;
    std::string eu_number;
    std::string inn;
    std::string mah;
    std::string indication;
    std::string atc_raw; // structured block exactly as found on the page
    std::string page_url;
    std::string status; // registry lifecycle field, drives the active filter
};

struct ProcedureRecord {
    std::string procedure_id;
    std::string procedure_type;
    std::string ema_number;
    std::string decision_number;
    std::string decision_date; // ISO, empty when absent
    std::string close_date;    // ISO, empty when absent
    std::string document_link;
};

// The register pages embed their data as script variables; the variable and
// key names are configuration because the recorded fixtures define them.
struct PageSelectors {
    std::string product_var = "product";
    std::string procedures_var = "procedures";

    std::string key_name = "name";
    std::string key_eu_number = "eu_num";
    std::string key_inn = "inn";
    std::string key_mah = "mah";
    std::string key_indication = "indication";
    std::string key_atc = "atc";
    std::string key_status = "status";
    std::string key_url = "url";

    std::string key_proc_id = "id";
    std::string key_proc_type = "type";
    std::string key_proc_ema = "ema_number";
    std::string key_proc_decision_number = "decision_number";
    std::string key_proc_decision_date = "decision_date";
    std::string key_proc_close = "closing_date";
    std::string key_proc_link = "files_url";
};

// Extracts the embedded script variables. Procedures come back sorted by
// close date ascending; ties keep page order. Fields absent on the page stay
// empty. Throws StructureError when the product block is missing and
// DecodeError (with byte offset) when an embedded document is malformed.
std::pair<ProductMetadata, std::vector<ProcedureRecord>>
parse_product_page(const std::string& html, const PageSelectors& selectors = {},
                   Log& log = null_log());

// Locates "var <name> = ..." and returns the balanced JSON value after the
// equals sign, with its byte offset in the page.
std::optional<std::pair<std::string, size_t>> extract_script_variable(const std::string& html,
                                                                      const std::string& name);

extern const CsvRow kProceduresHeader;
std::vector<CsvRow> procedures_to_csv(const std::vector<ProcedureRecord>& procedures);
std::vector<ProcedureRecord> procedures_from_csv(const std::vector<CsvRow>& rows);

nlohmann::json metadata_to_json(const ProductMetadata& meta);
ProductMetadata metadata_from_json(const nlohmann::json& doc);

} // namespace aetrace
