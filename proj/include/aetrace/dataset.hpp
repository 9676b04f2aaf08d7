#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "aetrace/csv.hpp"
#include "aetrace/logging.hpp"
#include "aetrace/meddra.hpp"
#include "aetrace/register_index.hpp"
#include "aetrace/register_scraper.hpp"
#include "aetrace/time_indexer.hpp"

namespace aetrace {

// ATC code -> official description, user-supplied (two-column table).
using AtcReference = std::map<std::string, std::string>;

AtcReference load_atc_reference(const std::string& csv_text);

// The five prefix-nested ATC levels (code lengths 1/3/4/5/7) with their
// descriptions; unknown codes leave the description empty.
struct AtcClassification {
    std::string l1_code, l1_desc;
    std::string l2_code, l2_desc;
    std::string l3_code, l3_desc;
    std::string l4_code, l4_desc;
    std::string l5_code, l5_desc;

    bool operator==(const AtcClassification&) const = default;
};

// Expands a level-5 code (letter, 2 digits, 2 letters, 2 digits) into all
// five levels. Malformed codes raise AtcError.
AtcClassification expand_atc(const std::string& code, const AtcReference& ref);

// One row of the 36-variable association table, grouped as in its
// documentation: drug identification, adverse-event information, MedDRA
// classification, ATC classification, regulatory metadata, traceability.
struct DrugAeAssociation {
    std::string brand_name;
    std::string inn;
    std::string eu_num;
    std::string mah;

    std::string llm_extracted_ae;
    std::string source; // one of the two Source literals
    std::string reference_date;
    std::string date_added;

    std::string pt_term, pt_code;
    std::string hlt_term, hlt_code;
    std::string hlgt_term, hlgt_code;
    std::string soc_term, soc_code;
    std::string match_method;

    AtcClassification atc;

    std::string close_date;
    std::string procedure;
    std::string ema_number;
    std::string decision_number;
    std::string decision_date;
    std::string link;
    std::string indication;
    std::string atc_raw; // full classification as found on the page (JSON)

    std::string source_file;

    CsvRow to_row() const;
    static DrugAeAssociation from_row(const CsvRow& row);

    bool operator==(const DrugAeAssociation&) const = default;
};

// The fixed, versioned 36-column header of the association table.
extern const CsvRow kDatasetHeader;

struct AssembleInputs {
    std::vector<EnrichedProduct> products;
    std::map<std::string, ProductMetadata> pages;                    // by eu_number
    std::map<std::string, std::vector<ProcedureRecord>> procedures;  // by eu_number
    std::vector<TimelineEntry> timeline;                             // product_id = eu_number
    std::vector<MappedTerm> mapping;                                 // unique raw terms
    AtcReference atc_ref;
    bool processed_mode = true;                     // keep active products only
    std::map<std::string, bool> active_overrides;   // eu_number -> forced status
};

struct AssembleStats {
    std::size_t rows_emitted = 0;
    std::size_t skipped_no_product = 0;   // timeline entries without metadata
    std::size_t excluded_inactive = 0;    // entries dropped by the active filter
    std::size_t atc_failures = 0;         // rows emitted with an empty ATC block
    std::size_t unmatched_procedures = 0; // rows with no procedure on the added date
};

struct AssembleResult {
    std::vector<DrugAeAssociation> rows; // sorted by (eu_num, date_added, pt_term, raw)
    AssembleStats stats;
};

AssembleResult assemble(const AssembleInputs& in, Log& log = null_log());

// Serializes rows under the fixed header. Stable row order makes re-exports
// byte-identical.
std::string dataset_to_csv(const std::vector<DrugAeAssociation>& rows);
std::vector<DrugAeAssociation> dataset_from_csv(const std::string& csv_text);

// Single-sheet spreadsheet workbook with the same header + rows.
std::string dataset_to_xlsx(const std::vector<DrugAeAssociation>& rows);

struct ExportPaths {
    std::filesystem::path csv;
    std::filesystem::path xlsx; // empty when the format was not requested
};

// Writes dataset files into out_dir, named dataset_<run_timestamp>.<ext>.
ExportPaths export_dataset(const std::vector<DrugAeAssociation>& rows,
                           const std::filesystem::path& out_dir,
                           const std::string& run_timestamp, bool with_xlsx = true,
                           Log& log = null_log());

} // namespace aetrace
