#include "aetrace/dataset.hpp"

#include <algorithm>
#include <cctype>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"
#include "aetrace/zipfile.hpp"

namespace aetrace {

namespace fs = std::filesystem;

// --- ATC ----------------------------------------------------------------------

AtcReference load_atc_reference(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    AtcReference ref;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        if (r.size() < 2) throw ParseError("ATC reference row " + std::to_string(i + 1) +
                                           " needs code,description");
        if (i == 0 && equals_icase(r[0], "code")) continue; // header
        ref[to_upper(trim(r[0]))] = trim(r[1]);
    }
    return ref;
}

namespace {

bool is_valid_atc5(const std::string& code) {
    if (code.size() != 7) return false;
    auto alpha = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; };
    auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
    return alpha(code[0]) && digit(code[1]) && digit(code[2]) && alpha(code[3]) &&
           alpha(code[4]) && digit(code[5]) && digit(code[6]);
}

std::string describe(const AtcReference& ref, const std::string& code) {
    auto it = ref.find(code);
    return it == ref.end() ? "" : it->second;
}

} // namespace

AtcClassification expand_atc(const std::string& code, const AtcReference& ref) {
    std::string c = to_upper(trim(code));
    if (!is_valid_atc5(c))
        throw AtcError("'" + code + "' is not a level-5 ATC code (letter, 2 digits, 2 letters, 2 digits)");
    AtcClassification a;
    a.l1_code = c.substr(0, 1);
    a.l2_code = c.substr(0, 3);
    a.l3_code = c.substr(0, 4);
    a.l4_code = c.substr(0, 5);
    a.l5_code = c;
    a.l1_desc = describe(ref, a.l1_code);
    a.l2_desc = describe(ref, a.l2_code);
    a.l3_desc = describe(ref, a.l3_code);
    a.l4_desc = describe(ref, a.l4_code);
    a.l5_desc = describe(ref, a.l5_code);
    return a;
}

// --- row serialization ----------------------------------------------------------

const CsvRow kDatasetHeader = {
    "Brand_Name",
    "inn",
    "Union_register_eu_num",
    "Union_register_mah",
    "LLM_extracted_AE",
    "Source",
    "Reference Date",
    "Date Added",
    "MedDRA_PT_Term",
    "MedDRA_PT_Code",
    "MedDRA_HLT_Term",
    "MedDRA_HLT_Code",
    "MedDRA_HLGT_Term",
    "MedDRA_HLGT_Code",
    "MedDRA_SOC_Term",
    "MedDRA_SOC_Code",
    "MedDRA_Match_Method",
    "ATC_Level_1_Code",
    "ATC_Level_1_Desc",
    "ATC_Level_2_Code",
    "ATC_Level_2_Desc",
    "ATC_Level_3_Code",
    "ATC_Level_3_Desc",
    "ATC_Level_4_Code",
    "ATC_Level_4_Desc",
    "ATC_Level_5_Code",
    "ATC_Level_5_Desc",
    "Union_register_close_date",
    "Union_register_procedure",
    "Union_register_Ema_number",
    "Union_register_decisio_number",
    "Union_register_decision_date",
    "Union_register_link",
    "Union_register_indication",
    "Union_register_atc",
    "Source_File",
};

CsvRow DrugAeAssociation::to_row() const {
    return {brand_name, inn,          eu_num,       mah,          llm_extracted_ae,
            source,     reference_date, date_added, pt_term,      pt_code,
            hlt_term,   hlt_code,     hlgt_term,    hlgt_code,    soc_term,
            soc_code,   match_method, atc.l1_code,  atc.l1_desc,  atc.l2_code,
            atc.l2_desc, atc.l3_code, atc.l3_desc,  atc.l4_code,  atc.l4_desc,
            atc.l5_code, atc.l5_desc, close_date,   procedure,    ema_number,
            decision_number, decision_date, link,   indication,   atc_raw,
            source_file};
}

DrugAeAssociation DrugAeAssociation::from_row(const CsvRow& row) {
    if (row.size() != kDatasetHeader.size())
        throw ParseError("association row has " + std::to_string(row.size()) +
                         " fields, expected " + std::to_string(kDatasetHeader.size()));
    DrugAeAssociation r;
    std::size_t i = 0;
    r.brand_name = row[i++];
    r.inn = row[i++];
    r.eu_num = row[i++];
    r.mah = row[i++];
    r.llm_extracted_ae = row[i++];
    r.source = row[i++];
    r.reference_date = row[i++];
    r.date_added = row[i++];
    r.pt_term = row[i++];
    r.pt_code = row[i++];
    r.hlt_term = row[i++];
    r.hlt_code = row[i++];
    r.hlgt_term = row[i++];
    r.hlgt_code = row[i++];
    r.soc_term = row[i++];
    r.soc_code = row[i++];
    r.match_method = row[i++];
    r.atc.l1_code = row[i++];
    r.atc.l1_desc = row[i++];
    r.atc.l2_code = row[i++];
    r.atc.l2_desc = row[i++];
    r.atc.l3_code = row[i++];
    r.atc.l3_desc = row[i++];
    r.atc.l4_code = row[i++];
    r.atc.l4_desc = row[i++];
    r.atc.l5_code = row[i++];
    r.atc.l5_desc = row[i++];
    r.close_date = row[i++];
    r.procedure = row[i++];
    r.ema_number = row[i++];
    r.decision_number = row[i++];
    r.decision_date = row[i++];
    r.link = row[i++];
    r.indication = row[i++];
    r.atc_raw = row[i++];
    r.source_file = row[i++];
    return r;
}

// --- assembly --------------------------------------------------------------------

AssembleResult assemble(const AssembleInputs& in, Log& log) {
    std::map<std::string, const EnrichedProduct*> products;
    for (const auto& p : in.products) products[p.entry.eu_number] = &p;

    std::map<std::string, const MappedTerm*> mapping;
    for (const auto& m : in.mapping) mapping[norm_key(m.raw_term)] = &m;

    // Expand each product's ATC once; failures leave the block empty.
    std::map<std::string, AtcClassification> atc_cache;
    AssembleResult result;

    auto is_active = [&](const std::string& eu_number) {
        auto ov = in.active_overrides.find(eu_number);
        if (ov != in.active_overrides.end()) return ov->second;
        auto page = in.pages.find(eu_number);
        if (page == in.pages.end()) {
            log.warn("no_page_metadata", "no scraped page for product, treated as active",
                     {{"eu_number", eu_number}});
            return true;
        }
        return equals_icase(trim(page->second.status), "active");
    };

    for (const auto& e : in.timeline) {
        auto prod_it = products.find(e.product_id);
        if (prod_it == products.end()) {
            log.error("no_product_metadata", "timeline entry skipped, product unknown",
                      {{"product_id", e.product_id}, {"raw_term", e.raw_term}});
            ++result.stats.skipped_no_product;
            continue;
        }
        const EnrichedProduct& prod = *prod_it->second;
        if (in.processed_mode && !is_active(e.product_id)) {
            ++result.stats.excluded_inactive;
            continue;
        }

        const ProductMetadata* page = nullptr;
        if (auto it = in.pages.find(e.product_id); it != in.pages.end()) page = &it->second;

        DrugAeAssociation row;
        row.brand_name = page && !page->brand_name.empty() ? page->brand_name : prod.entry.brand_name;
        row.inn = page && !page->inn.empty() ? page->inn : prod.inn;
        row.eu_num = e.product_id;
        row.mah = page && !page->mah.empty() ? page->mah : prod.mah;

        row.llm_extracted_ae = e.raw_term;
        row.source = to_string(e.source);
        row.reference_date = e.reference_date;
        row.date_added = e.date_added;

        if (auto m = mapping.find(norm_key(e.raw_term)); m != mapping.end()) {
            const MappedTerm& t = *m->second;
            row.pt_term = t.pt_term;
            row.pt_code = t.pt_code;
            row.hlt_term = t.hlt_term;
            row.hlt_code = t.hlt_code;
            row.hlgt_term = t.hlgt_term;
            row.hlgt_code = t.hlgt_code;
            row.soc_term = t.soc_term;
            row.soc_code = t.soc_code;
            row.match_method = to_string(t.method);
        } else {
            row.match_method = to_string(MatchMethod::Unmatched);
        }

        if (!atc_cache.count(e.product_id)) {
            try {
                atc_cache[e.product_id] = expand_atc(prod.atc_code, in.atc_ref);
            } catch (const AtcError& err) {
                log.warn("bad_atc", err.what(),
                         {{"eu_number", e.product_id}, {"atc", prod.atc_code}});
                ++result.stats.atc_failures;
                atc_cache[e.product_id] = AtcClassification{};
            }
        }
        row.atc = atc_cache[e.product_id];

        // The added-on date is a procedure closing date; join on equality.
        const ProcedureRecord* proc = nullptr;
        if (auto it = in.procedures.find(e.product_id); it != in.procedures.end())
            for (const auto& p : it->second)
                if (p.close_date == e.date_added) { proc = &p; break; }
        if (proc) {
            row.close_date = proc->close_date;
            row.procedure = proc->procedure_type;
            row.ema_number = proc->ema_number;
            row.decision_number = proc->decision_number;
            row.decision_date = proc->decision_date;
            row.link = proc->document_link;
        } else {
            ++result.stats.unmatched_procedures;
        }

        if (page) {
            row.indication = page->indication;
            row.atc_raw = page->atc_raw;
        }
        row.source_file = e.source_file;

        result.rows.push_back(std::move(row));
        ++result.stats.rows_emitted;
    }

    std::sort(result.rows.begin(), result.rows.end(),
              [](const DrugAeAssociation& a, const DrugAeAssociation& b) {
                  return std::tie(a.eu_num, a.date_added, a.pt_term, a.llm_extracted_ae,
                                  a.pt_code) <
                         std::tie(b.eu_num, b.date_added, b.pt_term, b.llm_extracted_ae,
                                  b.pt_code);
              });
    return result;
}

// --- export ----------------------------------------------------------------------

std::string dataset_to_csv(const std::vector<DrugAeAssociation>& rows) {
    std::vector<CsvRow> csv;
    csv.push_back(kDatasetHeader);
    for (const auto& r : rows) csv.push_back(r.to_row());
    return csv_to_string(csv);
}

std::vector<DrugAeAssociation> dataset_from_csv(const std::string& csv_text) {
    auto rows = parse_csv(csv_text);
    if (rows.empty()) throw ParseError("dataset file is empty");
    if (rows.front() != kDatasetHeader)
        throw ParseError("dataset header does not match the 36-column schema");
    std::vector<DrugAeAssociation> out;
    for (std::size_t i = 1; i < rows.size(); ++i) out.push_back(DrugAeAssociation::from_row(rows[i]));
    return out;
}

namespace {

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        case '\'': out += "&apos;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string column_letter(std::size_t idx) {
    std::string s;
    idx += 1;
    while (idx > 0) {
        s.insert(s.begin(), static_cast<char>('A' + (idx - 1) % 26));
        idx = (idx - 1) / 26;
    }
    return s;
}

std::string sheet_xml(const std::vector<CsvRow>& rows) {
    std::string xml = "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                      "<worksheet xmlns=\"http://schemas.openxmlformats.org/"
                      "spreadsheetml/2006/main\"><sheetData>";
    for (std::size_t r = 0; r < rows.size(); ++r) {
        xml += "<row r=\"" + std::to_string(r + 1) + "\">";
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            xml += "<c r=\"" + column_letter(c) + std::to_string(r + 1) + "\" t=\"inlineStr\"><is><t xml:space=\"preserve\">" +
                   xml_escape(rows[r][c]) + "</t></is></c>";
        }
        xml += "</row>";
    }
    xml += "</sheetData></worksheet>\n";
    return xml;
}

} // namespace

std::string dataset_to_xlsx(const std::vector<DrugAeAssociation>& rows) {
    std::vector<CsvRow> table;
    table.push_back(kDatasetHeader);
    for (const auto& r : rows) table.push_back(r.to_row());

    ZipWriter zip;
    zip.add_entry("[Content_Types].xml",
                  "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                  "<Types xmlns=\"http://schemas.openxmlformats.org/package/2006/content-types\">"
                  "<Default Extension=\"rels\" ContentType=\"application/vnd.openxmlformats-package.relationships+xml\"/>"
                  "<Default Extension=\"xml\" ContentType=\"application/xml\"/>"
                  "<Override PartName=\"/xl/workbook.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml\"/>"
                  "<Override PartName=\"/xl/worksheets/sheet1.xml\" ContentType=\"application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml\"/>"
                  "</Types>\n");
    zip.add_entry("_rels/.rels",
                  "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                  "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
                  "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/officeDocument\" Target=\"xl/workbook.xml\"/>"
                  "</Relationships>\n");
    zip.add_entry("xl/workbook.xml",
                  "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                  "<workbook xmlns=\"http://schemas.openxmlformats.org/spreadsheetml/2006/main\" "
                  "xmlns:r=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships\">"
                  "<sheets><sheet name=\"Dataset\" sheetId=\"1\" r:id=\"rId1\"/></sheets>"
                  "</workbook>\n");
    zip.add_entry("xl/_rels/workbook.xml.rels",
                  "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"yes\"?>\n"
                  "<Relationships xmlns=\"http://schemas.openxmlformats.org/package/2006/relationships\">"
                  "<Relationship Id=\"rId1\" Type=\"http://schemas.openxmlformats.org/officeDocument/2006/relationships/worksheet\" Target=\"worksheets/sheet1.xml\"/>"
                  "</Relationships>\n");
    zip.add_entry("xl/worksheets/sheet1.xml", sheet_xml(table));
    return zip.finish();
}

ExportPaths export_dataset(const std::vector<DrugAeAssociation>& rows, const fs::path& out_dir,
                           const std::string& run_timestamp, bool with_xlsx, Log& log) {
    if (rows.empty())
        log.warn("empty_dataset", "exporting a header-only dataset", {});
    ExportPaths paths;
    try {
        fs::create_directories(out_dir);
        paths.csv = out_dir / ("dataset_" + run_timestamp + ".csv");
        write_file_if_changed(paths.csv, dataset_to_csv(rows));
        if (with_xlsx) {
            paths.xlsx = out_dir / ("dataset_" + run_timestamp + ".xlsx");
            write_file_if_changed(paths.xlsx, dataset_to_xlsx(rows));
        }
    } catch (const std::exception& e) {
        throw ExportError("failed to export dataset into " + out_dir.string() + ": " + e.what());
    }
    log.info("dataset_exported", "dataset files written",
             {{"rows", rows.size()}, {"csv", paths.csv.string()}});
    return paths;
}

} // namespace aetrace
