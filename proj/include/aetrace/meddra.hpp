#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aetrace/csv.hpp"
#include "aetrace/gateway.hpp"
#include "aetrace/logging.hpp"

namespace aetrace {

// MedDRA is multi-axial: one PT can link to several HLTs (and so on up the
// tree). The policy decides which single parent survives for table purposes.
enum class AxialityPolicy {
    LastLoaded,  // the final file row bearing a child wins
    PrimaryFlag, // the row flagged "Y" wins regardless of order
};

struct Hierarchy {
    AxialityPolicy policy = AxialityPolicy::LastLoaded;

    // Level name tables, keyed by code.
    std::map<std::string, std::string> pt_names;
    std::map<std::string, std::string> hlt_names;
    std::map<std::string, std::string> hlgt_names;
    std::map<std::string, std::string> soc_names;

    // Case-insensitive PT name lookup: norm_key(name) -> code.
    std::map<std::string, std::string> pt_by_name;

    // Policy-resolved child -> parent links (one parent per child).
    std::map<std::string, std::string> pt_to_hlt;
    std::map<std::string, std::string> hlt_to_hlgt;
    std::map<std::string, std::string> hlgt_to_soc;

    // SOC code -> every PT whose resolved chain lands in that SOC. Exact
    // inverse of the top-down traversal under the active policy.
    std::map<std::string, std::set<std::string>> reverse_index;

    // (code, name) pairs in file order, de-duplicated by code.
    std::vector<std::pair<std::string, std::string>> soc_list;
};

// Loads the seven $-delimited .asc files (pt, hlt, hlgt, soc, hlt_pt,
// hlgt_hlt, soc_hlgt) from `dir`. Missing files raise LoadError naming the
// file; files with zero usable rows raise LoadError; malformed rows are
// skipped with a logged line number.
Hierarchy load_hierarchy(const std::filesystem::path& dir, AxialityPolicy policy,
                         Log& log = null_log());

// Pass 1: case-insensitive exact match of a raw term against PT names.
std::optional<std::string> match_exact(const std::string& term, const Hierarchy& h);

// The two-level path above a PT, resolved under the hierarchy's policy.
struct HierarchyPath {
    std::string pt_code;
    std::string pt_term;
    std::string hlt_code;
    std::string hlt_term;
    std::string hlgt_code;
    std::string hlgt_term;
    std::string soc_code;
    std::string soc_term;
};

// Walks PT -> HLT -> HLGT -> SOC. A broken link or a code with no name entry
// raises HierarchyError naming the level.
HierarchyPath resolve_hierarchy(const std::string& pt_code, const Hierarchy& h);

// Asks the gateway which SOCs plausibly contain the term. Answers are
// validated against the loaded SOC list (case-insensitive name match,
// unknown names dropped) and capped at three. Returns SOC codes. These
// predictions steer the candidate pool only; they are never persisted.
std::vector<std::string> predict_socs(const std::string& term, TextModelGateway& gateway,
                                      const GatewayConfig& cfg, const Hierarchy& h,
                                      const std::string& prompt_template, Log& log = null_log());

// Pass 2: picks the best PT for `term` out of the PTs living under the given
// SOCs. Candidates are offered name-sorted, batched so each prompt stays
// inside the context budget; batch winners meet in a final round. Any
// selection outside the candidate pool is rejected. Returns the PT code, or
// nullopt when the pool is empty or no valid selection is made.
std::optional<std::string> match_soc_filtered(const std::string& term,
                                              const std::vector<std::string>& soc_codes,
                                              TextModelGateway& gateway,
                                              const GatewayConfig& cfg, const Hierarchy& h,
                                              const std::string& prompt_template,
                                              Log& log = null_log());

enum class MatchMethod { ExactMatch, SocFilteredMatch, Manual, Unmatched, Error };

std::string to_string(MatchMethod m);
MatchMethod match_method_from_string(const std::string& s);

struct MappedTerm {
    std::string raw_term;
    std::string pt_term;
    std::string pt_code;
    std::string hlt_term;
    std::string hlt_code;
    std::string hlgt_term;
    std::string hlgt_code;
    std::string soc_term;
    std::string soc_code;
    MatchMethod method = MatchMethod::Unmatched;

    bool operator==(const MappedTerm&) const = default;
};

struct MappingPrompts {
    std::string predict_socs;
    std::string select_pt;
};

// Runs the full two-pass mapping for one term. Gateway failures degrade to
// Error rows, an empty prediction or pool to Unmatched rows; this never
// throws for a single term.
MappedTerm map_term(const std::string& term, const Hierarchy& h, TextModelGateway& gateway,
                    const GatewayConfig& cfg, const MappingPrompts& prompts,
                    Log& log = null_log());

extern const CsvRow kMappingHeader;

std::string mapping_to_csv(const std::vector<MappedTerm>& rows);
std::vector<MappedTerm> mapping_from_csv(const std::string& csv_text);

} // namespace aetrace
