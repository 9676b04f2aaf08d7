#include "aetrace/smpc_corpus.hpp"

#include <algorithm>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/strings.hpp"

namespace aetrace {

namespace {

constexpr std::string_view kUndesirable = "undesirable";
constexpr std::string_view kEffects = "effects";

bool icase_at(const std::string& text, size_t pos, std::string_view word) {
    if (pos + word.size() > text.size()) return false;
    for (size_t i = 0; i < word.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(text[pos + i])) != word[i]) return false;
    return true;
}

size_t skip_blanks(const std::string& text, size_t pos) {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    return pos;
}

// Matches one heading variant at `pos`; returns one-past-the-heading or 0.
size_t match_heading(const std::string& text, size_t pos) {
    // "4.8", optional ".", then blanks or a line break before "Undesirable"
    if (text.compare(pos, 3, "4.8") == 0) {
        size_t j = pos + 3;
        if (j < text.size() && text[j] == '.') ++j;
        size_t k = skip_blanks(text, j);
        if (k > j && icase_at(text, k, kUndesirable)) return k + kUndesirable.size();
        if (k < text.size() && (text[k] == '\r' || text[k] == '\n')) {
            if (text[k] == '\r') ++k;
            if (k < text.size() && text[k] == '\n') ++k;
            k = skip_blanks(text, k);
            if (icase_at(text, k, kUndesirable)) return k + kUndesirable.size();
        }
        return 0;
    }
    // bare "Undesirable effects"
    if (icase_at(text, pos, kUndesirable)) {
        size_t k = pos + kUndesirable.size();
        size_t ws = k;
        while (ws < text.size() && std::isspace(static_cast<unsigned char>(text[ws]))) ++ws;
        if (ws > k && icase_at(text, ws, kEffects)) return ws + kEffects.size();
    }
    return 0;
}

/// End marker: "4.9" token anywhere, or "5." at the start of a line.
std::optional<size_t> find_section_end(const std::string& text, size_t from) {
    for (size_t i = from; i < text.size(); ++i) {
        if (text.compare(i, 3, "4.9") == 0) {
            size_t after = i + 3;
            if (after >= text.size() || text[after] == '.' || text[after] == ' ' ||
                text[after] == '\t' || text[after] == '\r' || text[after] == '\n')
                return i;
        }
        if (text.compare(i, 2, "5.") == 0 && (i == 0 || text[i - 1] == '\n')) {
            size_t after = i + 2;
            if (after < text.size() && (text[after] == ' ' || text[after] == '\t' ||
                                        text[after] == '\r' || text[after] == '\n'))
                return i;
        }
    }
    return std::nullopt;
}

} // namespace

SectionSpan locate_section_4_8(const std::string& text) {
    if (text.empty()) throw SectionNotFound("empty document text");

    size_t heading_start = std::string::npos;
    size_t heading_end = 0;
    for (size_t i = 0; i < text.size(); ++i) {
        if (size_t end = match_heading(text, i); end != 0) {
            heading_start = i;
            heading_end = end;
            break;
        }
    }
    if (heading_start == std::string::npos)
        throw SectionNotFound("no 'Undesirable effects' heading found");

    SectionSpan span;
    span.start = heading_start;
    span.end = find_section_end(text, heading_end).value_or(text.size());
    return span;
}

std::string CorpusLayout::sanitize_id(const std::string& product_id) {
    std::string out = product_id;
    for (char& c : out)
        if (c == '/' || c == '\\' || c == ':') c = '-';
    return out;
}

std::filesystem::path CorpusLayout::product_dir(const std::string& product_id) const {
    return root / sanitize_id(product_id);
}
std::filesystem::path CorpusLayout::latest_dir(const std::string& product_id) const {
    return product_dir(product_id) / "latest";
}
std::filesystem::path CorpusLayout::updates_dir(const std::string& product_id) const {
    return product_dir(product_id) / "updates";
}

namespace {

// Slot identity is (product, version date, kind); the run-timestamp suffix is
// provenance, not identity, so re-runs find files stored by earlier runs.
std::optional<std::filesystem::path> find_slot(const std::filesystem::path& dir,
                                               const std::string& prefix,
                                               const std::string& extension) {
    std::error_code ec;
    if (!std::filesystem::exists(dir, ec)) return std::nullopt;
    std::vector<std::filesystem::path> hits;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && entry.path().extension() == extension)
            hits.push_back(entry.path());
    }
    if (hits.empty()) return std::nullopt;
    std::sort(hits.begin(), hits.end());
    return hits.front();
}

} // namespace

std::filesystem::path store_slot_file(const std::filesystem::path& dir, const std::string& prefix,
                                      const std::string& extension,
                                      const std::string& run_timestamp,
                                      const std::string& content, Log& log) {
    std::filesystem::create_directories(dir);
    if (auto existing = find_slot(dir, prefix, extension)) {
        if (read_file(*existing) != content)
            throw StorageConflict("stored document differs for " + existing->string());
        return *existing;
    }
    std::filesystem::path path = dir / (prefix + run_timestamp + extension);
    write_file(path, content);
    log.info("stored_document", "wrote " + path.filename().string(), {});
    return path;
}

StoredPaths store_version(const CorpusLayout& layout, const SmpcVersion& version, bool is_latest,
                          const std::string& run_timestamp, Log& log) {
    const std::string pid = CorpusLayout::sanitize_id(version.product_id);
    const std::filesystem::path dir =
        is_latest ? layout.latest_dir(version.product_id) : layout.updates_dir(version.product_id);
    std::filesystem::create_directories(dir);

    const std::string base = pid + "_" + version.version_date.to_iso();
    const std::string section_prefix = base + "_section48_";
    const std::string aes_prefix = base + "_aes_";

    StoredPaths paths;
    if (auto existing = find_slot(dir, section_prefix, ".txt")) {
        const std::string on_disk = read_file(*existing);
        if (on_disk != version.section_4_8)
            throw StorageConflict("stored section differs for " + existing->string());
        paths.section_txt = *existing;
    } else {
        paths.section_txt = dir / (section_prefix + run_timestamp + ".txt");
        write_file(paths.section_txt, version.section_4_8);
        paths.wrote_section = true;
        log.info("stored_section", "wrote " + paths.section_txt.filename().string(),
                 {{"product", version.product_id}, {"date", version.version_date.to_iso()}});
    }

    if (auto existing_csv = find_slot(dir, aes_prefix, ".csv"))
        paths.parsed_csv = *existing_csv;
    else
        paths.parsed_csv = dir / (aes_prefix + run_timestamp + ".csv");
    return paths;
}

std::vector<SmpcVersion> finalize_versions(std::vector<SmpcVersion> versions, Log& log) {
    std::stable_sort(versions.begin(), versions.end(),
                     [](const SmpcVersion& a, const SmpcVersion& b) {
                         return a.version_date < b.version_date;
                     });
    std::vector<SmpcVersion> out;
    for (auto& v : versions) {
        if (!out.empty() && out.back().version_date == v.version_date) {
            log.warn("duplicate_version_date", "dropped duplicate version",
                     {{"product", v.product_id},
                      {"date", v.version_date.to_iso()},
                      {"kept", out.back().source_file},
                      {"dropped", v.source_file}});
            continue;
        }
        v.is_initial = false;
        out.push_back(std::move(v));
    }
    if (!out.empty()) out.front().is_initial = true;
    return out;
}

} // namespace aetrace
