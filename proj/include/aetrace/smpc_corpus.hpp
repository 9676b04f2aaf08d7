#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aetrace/dates.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

// One dated label document version.
struct SmpcVersion {
    std::string product_id; // EU number
    Date version_date;      // procedure close date of the producing procedure
    std::string source_file;
    std::string full_text;
    std::string section_4_8; // contiguous substring of full_text
    bool is_initial = false; // exactly one per product, the earliest date
};

struct SectionSpan {
    size_t start = 0;
    size_t end = 0;
};

// Finds the "Undesirable effects" section. The heading may appear as
// "Undesirable effects", "4.8 Undesirable", "4.8. Undesirable" or "4.8"
// followed by a line break and "Undesirable"; the word match ignores case.
// The section ends at the first subsequent "4.9" heading, else at the first
// top-level "5." heading, else at end of text. Throws SectionNotFound.
SectionSpan locate_section_4_8(const std::string& text);

struct CorpusLayout {
    std::filesystem::path root;

    // EU numbers contain '/', which cannot appear in a folder name.
    static std::string sanitize_id(const std::string& product_id);

    std::filesystem::path product_dir(const std::string& product_id) const;
    std::filesystem::path latest_dir(const std::string& product_id) const;
    std::filesystem::path updates_dir(const std::string& product_id) const;
};

struct StoredPaths {
    std::filesystem::path section_txt;
    std::filesystem::path parsed_csv; // reserved slot, written by the extract stage
    bool wrote_section = false;
};

// Stores one archival file into its logical slot (identity = prefix +
// extension, ignoring the run-timestamp suffix). Identical re-stores return
// the existing path; different bytes for the same slot throw StorageConflict.
std::filesystem::path store_slot_file(const std::filesystem::path& dir, const std::string& prefix,
                                      const std::string& extension,
                                      const std::string& run_timestamp,
                                      const std::string& content, Log& log = null_log());

// Writes the Section 4.8 text file and reserves the parsed-AE slot in
// "latest" or "updates". Filenames embed product, version date and the run
// timestamp. Re-storing identical content is a no-op that returns the
// existing paths; same logical slot with different bytes throws
// StorageConflict.
StoredPaths store_version(const CorpusLayout& layout, const SmpcVersion& version, bool is_latest,
                          const std::string& run_timestamp, Log& log = null_log());

// Sorts by version date, drops duplicate dates (first wins, logged) and marks
// the earliest version as initial.
std::vector<SmpcVersion> finalize_versions(std::vector<SmpcVersion> versions,
                                           Log& log = null_log());

} // namespace aetrace
