#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "aetrace/csv.hpp"
#include "aetrace/gateway.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

// One adverse-event term as extracted from a section 4.8 text, tagged with
// the document it came from so every row stays traceable to its source.
struct RawAeTerm {
    std::string text;
    std::string product_id;
    std::string version_date; // ISO date of the label version
    std::string source_file;

    bool operator==(const RawAeTerm&) const = default;
};

// Fills the {{SECTION_TEXT}} placeholder of the extraction prompt template.
std::string build_extraction_prompt(const std::string& prompt_template,
                                    const std::string& section_text);

// Sends one section 4.8 text through the gateway and parses the CSV response
// into terms, preserving response order. Empty/whitespace-only sections never
// reach the gateway. An unparseable response raises ResponseFormatError.
std::vector<RawAeTerm> extract_aes(const std::string& section_text, const std::string& product_id,
                                   const std::string& version_date,
                                   const std::string& source_file, TextModelGateway& gateway,
                                   const GatewayConfig& cfg, const std::string& prompt_template,
                                   Log& log = null_log());

// Annotation-stripping rules, loaded from a JSON config so clean-up behaviour
// can evolve without code changes.
struct CleanRules {
    bool strip_parentheticals = true;
    std::vector<std::string> strip_patterns;      // case-insensitive regexes, removed
    std::vector<std::string> trailing_qualifiers; // frequency words stripped off term ends
};

CleanRules load_clean_rules(const std::filesystem::path& json_file);

// Normalises a single term under the given rules: drops parentheticals,
// applies the strip patterns, peels trailing frequency qualifiers, and
// collapses whitespace. Idempotent.
std::string clean_term_text(const std::string& text, const CleanRules& rules);

// Cleans every term and de-duplicates case-insensitively within the same
// (product, version); the first occurrence wins. Terms cleaned down to
// nothing are dropped.
std::vector<RawAeTerm> clean_terms(const std::vector<RawAeTerm>& terms, const CleanRules& rules,
                                   Log& log = null_log());

extern const CsvRow kParsedAeHeader;

std::string aes_to_csv(const std::vector<RawAeTerm>& terms);
std::vector<RawAeTerm> aes_from_csv(const std::string& csv_text);

} // namespace aetrace
