#include "aetrace/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <map>
#include <set>

#include <json.hpp>

#include "aetrace/ae_extractor.hpp"
#include "aetrace/analytics.hpp"
#include "aetrace/dataset.hpp"
#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/hash.hpp"
#include "aetrace/meddra.hpp"
#include "aetrace/pdf_text.hpp"
#include "aetrace/register_index.hpp"
#include "aetrace/register_scraper.hpp"
#include "aetrace/smpc_corpus.hpp"
#include "aetrace/strings.hpp"
#include "aetrace/time_indexer.hpp"
#include "aetrace/validation.hpp"
#include "aetrace/version.hpp"

namespace aetrace {

namespace fs = std::filesystem;
using nlohmann::json;

// --- config ------------------------------------------------------------------

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string now_timestamp() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

} // namespace

RunConfig load_run_config(const fs::path& config_file) {
    if (!fs::exists(config_file))
        throw ConfigError("config file not found: " + config_file.string());
    json doc;
    try {
        doc = json::parse(read_file(config_file));
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + config_file.string() + " is not valid JSON: " +
                          e.what());
    }

    RunConfig cfg;
    const json inputs = doc.value("inputs", json::object());
    const json fetch = doc.value("fetch", json::object());
    const json transport = doc.value("transport", json::object());
    const json gateway = doc.value("gateway", json::object());

    // Raw string values, kept for hashing before path resolution.
    const std::string raw_corpus = doc.value("corpus_root", "corpus");
    cfg.data_lock_date = doc.value("data_lock_date", std::string("2025-12-15"));
    cfg.run_timestamp = doc.value("run_timestamp", std::string());
    cfg.processed_mode = doc.value("processed_mode", true);
    cfg.parallelism = doc.value("parallelism", 1);
    cfg.axiality_policy = doc.value("axiality_policy", std::string("last_loaded"));

    cfg.fetch.rate_limit = fetch.value("rate_limit_per_sec", 1.0);
    cfg.fetch.max_retries = fetch.value("max_retries", 3);
    if (fetch.contains("backoff_ms")) cfg.fetch.backoff_ms = fetch["backoff_ms"].get<std::vector<int>>();
    cfg.fetch.user_agent = fetch.value("user_agent", cfg.fetch.user_agent);

    cfg.transport_mode = transport.value("mode", std::string("http"));
    const std::string raw_replay = transport.value("replay_dir", std::string());

    cfg.gateway_mode = gateway.value("mode", std::string("http"));
    const std::string raw_stub = gateway.value("stub_responses", std::string());
    cfg.gateway.endpoint = gateway.value("endpoint", cfg.gateway.endpoint);
    cfg.gateway.model_id = gateway.value("model_id", cfg.gateway.model_id);
    cfg.gateway.temperature = gateway.value("temperature", 0.0);
    cfg.gateway.max_context = gateway.value("max_context", cfg.gateway.max_context);
    cfg.gateway.api_key_env = gateway.value("api_key_env", cfg.gateway.api_key_env);
    cfg.gateway.system_prompt = gateway.value("system_prompt", cfg.gateway.system_prompt);

    const std::string raw_cache = doc.value("cache_dir", std::string());
    const std::string raw_brand = inputs.value("brand_index", std::string());
    const std::string raw_ema = inputs.value("ema_report", std::string());
    const std::string raw_term = inputs.value("terminology_dir", std::string());
    const std::string raw_atc = inputs.value("atc_reference", std::string());
    const std::string raw_bio = inputs.value("biologics", std::string());
    const std::string raw_prac = inputs.value("prac_dates", std::string());
    const std::string raw_gold = inputs.value("gold_dir", std::string());
    const std::string raw_over = inputs.value("overrides", std::string());
    const std::string raw_prompts = inputs.value("prompts_dir", std::string());
    const std::string raw_rules = inputs.value("clean_rules", std::string());

    // Validation.
    if (!Date::parse(cfg.data_lock_date))
        throw ConfigError("data_lock_date '" + cfg.data_lock_date + "' is not a valid date");
    if (cfg.axiality_policy != "last_loaded" && cfg.axiality_policy != "primary_flag")
        throw ConfigError("axiality_policy must be last_loaded or primary_flag");
    if (cfg.transport_mode != "http" && cfg.transport_mode != "replay")
        throw ConfigError("transport mode must be http or replay");
    if (cfg.gateway_mode != "http" && cfg.gateway_mode != "stub")
        throw ConfigError("gateway mode must be http or stub");
    if (cfg.gateway.temperature != 0.0)
        throw ConfigError("pipeline runs require temperature 0.0 (determinism contract)");
    if (cfg.parallelism < 1) throw ConfigError("parallelism must be at least 1");
    if (cfg.fetch.rate_limit <= 0) throw ConfigError("fetch rate limit must be positive");

    // Canonical form: every semantic field, paths as authored; key order is
    // alphabetical by construction.
    json canon{
        {"axiality_policy", cfg.axiality_policy},
        {"cache_dir", raw_cache},
        {"corpus_root", raw_corpus},
        {"data_lock_date", cfg.data_lock_date},
        {"fetch", {{"backoff_ms", cfg.fetch.backoff_ms},
                   {"max_retries", cfg.fetch.max_retries},
                   {"rate_limit_per_sec", cfg.fetch.rate_limit},
                   {"user_agent", cfg.fetch.user_agent}}},
        {"gateway", {{"api_key_env", cfg.gateway.api_key_env},
                     {"endpoint", cfg.gateway.endpoint},
                     {"max_context", cfg.gateway.max_context},
                     {"mode", cfg.gateway_mode},
                     {"model_id", cfg.gateway.model_id},
                     {"stub_responses", raw_stub},
                     {"system_prompt", cfg.gateway.system_prompt},
                     {"temperature", cfg.gateway.temperature}}},
        {"inputs", {{"atc_reference", raw_atc},
                    {"biologics", raw_bio},
                    {"brand_index", raw_brand},
                    {"clean_rules", raw_rules},
                    {"ema_report", raw_ema},
                    {"gold_dir", raw_gold},
                    {"overrides", raw_over},
                    {"prac_dates", raw_prac},
                    {"prompts_dir", raw_prompts},
                    {"terminology_dir", raw_term}}},
        {"parallelism", cfg.parallelism},
        {"processed_mode", cfg.processed_mode},
        {"run_timestamp", cfg.run_timestamp},
        {"transport", {{"mode", cfg.transport_mode}, {"replay_dir", raw_replay}}},
    };
    cfg.canonical_json = canon.dump();
    cfg.config_hash = sha256_hex(cfg.canonical_json);

    const fs::path base = config_file.has_parent_path() ? config_file.parent_path() : ".";
    cfg.corpus_root = resolve(base, raw_corpus);
    cfg.replay_dir = resolve(base, raw_replay);
    cfg.stub_responses = resolve(base, raw_stub);
    cfg.cache_dir = resolve(base, raw_cache);
    cfg.brand_index = resolve(base, raw_brand);
    cfg.ema_report = resolve(base, raw_ema);
    cfg.terminology_dir = resolve(base, raw_term);
    cfg.atc_reference = resolve(base, raw_atc);
    cfg.biologics = resolve(base, raw_bio);
    cfg.prac_dates = resolve(base, raw_prac);
    cfg.gold_dir = resolve(base, raw_gold);
    cfg.overrides = resolve(base, raw_over);
    cfg.prompts_dir = resolve(base, raw_prompts);
    cfg.clean_rules = resolve(base, raw_rules);
    return cfg;
}

CorpusPaths::CorpusPaths(fs::path r)
    : root(std::move(r)), products(root / "products"), work(root / "work"),
      logs(root / "logs"), dataset_dir(root / "dataset"), analytics_dir(root / "analytics") {}

// --- report ------------------------------------------------------------------

const std::vector<std::string> kStageOrder = {"index",  "scrape",   "fetch",    "sections",
                                              "extract", "map",     "timeline", "assemble",
                                              "validate", "analyze"};

std::string run_report_to_json(const RunReport& report) {
    json stages = json::array();
    for (const auto& s : report.stages)
        stages.push_back({{"name", s.name},
                          {"successes", s.successes},
                          {"failures", s.failures},
                          {"warnings", s.warnings},
                          {"duration_ms", s.duration_ms}});
    json doc{{"tool_version", report.tool_version},
             {"config_hash", report.config_hash},
             {"stages", stages}};
    return doc.dump(2) + "\n";
}

// --- helpers -----------------------------------------------------------------

namespace {

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::exists(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == extension)
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<fs::path> sorted_dirs(const fs::path& dir) {
    std::vector<fs::path> out;
    std::error_code ec;
    if (!fs::exists(dir, ec)) return out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

void require_file(const fs::path& p, const std::string& what, const std::string& stage_to_run) {
    if (p.empty() || !fs::exists(p))
        throw PrerequisiteError(what + " not found at '" + p.string() + "'; run `" +
                                stage_to_run + "` first");
}

void require_input(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError(what + " is not configured");
    if (!fs::exists(p)) throw ConfigError(what + " not found at " + p.string());
}

// "{pid}_{YYYY-MM-DD}" prefix convention used by the work-area PDF names.
std::optional<std::string> date_from_stem(const std::string& stem) {
    if (stem.size() < 11) return std::nullopt;
    std::string date = stem.substr(stem.size() - 10);
    if (!Date::parse(date)) return std::nullopt;
    return date;
}

std::string pdf_name(const std::string& sanitized_pid, const std::string& iso_date) {
    return sanitized_pid + "_" + iso_date + ".pdf";
}

} // namespace

// --- pipeline ----------------------------------------------------------------

Pipeline::Pipeline(RunConfig cfg)
    : cfg_(std::move(cfg)), paths_(cfg_.corpus_root),
      data_lock_(Date::parse_or_throw(cfg_.data_lock_date)) {
    if (cfg_.run_timestamp.empty()) cfg_.run_timestamp = now_timestamp();
}

std::unique_ptr<Transport> Pipeline::make_transport() const {
    if (cfg_.transport_mode == "replay") {
        require_input(cfg_.replay_dir, "replay directory");
        return std::make_unique<ReplayTransport>(cfg_.replay_dir);
    }
    return std::make_unique<HttpTransport>(cfg_.fetch.user_agent);
}

std::shared_ptr<TextModelGateway> Pipeline::make_gateway(Log& log) const {
    std::shared_ptr<TextModelGateway> inner;
    if (cfg_.gateway_mode == "stub") {
        require_input(cfg_.stub_responses, "stub responses file");
        inner = std::make_shared<StubGateway>(StubGateway::load_responses(cfg_.stub_responses));
    } else {
        inner = std::make_shared<HttpChatGateway>(cfg_.gateway, log);
    }
    if (!cfg_.cache_dir.empty())
        return std::make_shared<CachingGateway>(inner, cfg_.gateway, cfg_.cache_dir, log);
    return inner;
}

void Pipeline::write_provenance(const fs::path& output, const std::string& stage) const {
    json doc{{"config_hash", cfg_.config_hash},
             {"stage", stage},
             {"tool_version", kToolVersion},
             {"axiality_policy", cfg_.axiality_policy},
             {"terminology_dir", cfg_.terminology_dir.filename().string()},
             {"run_timestamp", cfg_.run_timestamp}};
    write_file_if_changed(output.string() + ".provenance.json", doc.dump(2) + "\n");
}

std::string Pipeline::prompt(const std::string& name) const {
    require_input(cfg_.prompts_dir, "prompts directory");
    fs::path p = cfg_.prompts_dir / name;
    if (!fs::exists(p)) throw ConfigError("prompt template " + p.string() + " is missing");
    return read_file(p);
}

// index: brand index + agency report -> enriched product list.
void Pipeline::stage_index(Log& log, StageResult& r) {
    require_input(cfg_.brand_index, "brand index file");
    require_input(cfg_.ema_report, "agency report file");

    auto entries = parse_brand_index(read_csv_file(cfg_.brand_index), {}, log);
    auto report = parse_ema_report(read_csv_file(cfg_.ema_report), {}, log);
    auto products = join_with_ema_report(entries, report, log);

    fs::create_directories(paths_.work);
    write_file_if_changed(paths_.product_list(), csv_to_string(product_list_to_csv(products)));
    write_provenance(paths_.product_list(), "index");
    r.successes = products.size();
    log.info("index_done", "product list written",
             {{"products", products.size()}, {"path", paths_.product_list().string()}});
}

// scrape: product pages -> metadata.json + procedures.csv per product.
void Pipeline::stage_scrape(Log& log, StageResult& r) {
    require_file(paths_.product_list(), "product list", "index");
    auto products = product_list_from_csv(read_csv_file(paths_.product_list()));

    auto transport = make_transport();
    RateLimiter limiter(cfg_.fetch.rate_limit);
    RateLimiter* limiter_ptr = cfg_.transport_mode == "http" ? &limiter : nullptr;

    for (const auto& p : products) {
        const std::string pid = CorpusLayout::sanitize_id(p.entry.eu_number);
        try {
            std::string html = fetch_page(p.entry.register_url, cfg_.fetch, *transport, log,
                                          ExpectedContent::Html, limiter_ptr);
            auto [meta, procedures] = parse_product_page(html, {}, log);
            meta.eu_number = p.entry.eu_number;
            meta.page_url = p.entry.register_url;

            fs::path dir = paths_.products / pid;
            fs::create_directories(dir);
            write_file_if_changed(dir / "metadata.json", metadata_to_json(meta).dump(2) + "\n");
            write_file_if_changed(dir / "procedures.csv",
                                  csv_to_string(procedures_to_csv(procedures)));
            write_provenance(dir / "metadata.json", "scrape");
            ++r.successes;
        } catch (const Error& e) {
            log.error("scrape_failed", e.what(), {{"eu_number", p.entry.eu_number}});
        }
    }
}

// fetch: procedure document links -> PDFs in the work area + latest slot.
void Pipeline::stage_fetch(Log& log, StageResult& r) {
    require_file(paths_.product_list(), "product list", "index");
    auto products = product_list_from_csv(read_csv_file(paths_.product_list()));
    auto transport = make_transport();
    RateLimiter limiter(cfg_.fetch.rate_limit);
    RateLimiter* limiter_ptr = cfg_.transport_mode == "http" ? &limiter : nullptr;
    CorpusLayout layout{paths_.products};

    for (const auto& p : products) {
        const std::string pid = CorpusLayout::sanitize_id(p.entry.eu_number);
        fs::path proc_file = paths_.products / pid / "procedures.csv";
        if (!fs::exists(proc_file)) {
            throw PrerequisiteError("procedures.csv missing for " + p.entry.eu_number +
                                    "; run `scrape` first");
        }
        auto procedures = procedures_from_csv(read_csv_file(proc_file));

        std::string latest_date;
        std::string latest_body;
        for (const auto& proc : procedures) {
            if (proc.document_link.empty()) continue;
            if (proc.close_date.empty()) {
                log.warn("undated_document", "procedure document skipped, no close date",
                         {{"eu_number", p.entry.eu_number}, {"procedure", proc.procedure_id}});
                continue;
            }
            try {
                std::string body = fetch_page(proc.document_link, cfg_.fetch, *transport, log,
                                              ExpectedContent::Pdf, limiter_ptr);
                fs::path dir = paths_.pdf_dir() / pid;
                fs::create_directories(dir);
                write_file_if_changed(dir / pdf_name(pid, proc.close_date), body);
                ++r.successes;
                if (latest_date.empty() || proc.close_date > latest_date) {
                    latest_date = proc.close_date;
                    latest_body = body;
                }
            } catch (const Error& e) {
                log.error("fetch_failed", e.what(),
                          {{"eu_number", p.entry.eu_number}, {"url", proc.document_link}});
            }
        }
        // The most recent document also lives in the product's latest folder.
        if (!latest_date.empty())
            store_slot_file(layout.latest_dir(p.entry.eu_number),
                            pid + "_" + latest_date + "_smpc_", ".pdf", cfg_.run_timestamp,
                            latest_body, log);
    }
}

// sections: PDFs -> Section 4.8 text files in latest/ and updates/.
void Pipeline::stage_sections(Log& log, StageResult& r) {
    require_file(paths_.product_list(), "product list", "index");
    auto products = product_list_from_csv(read_csv_file(paths_.product_list()));
    CorpusLayout layout{paths_.products};

    bool any_pdfs = false;
    for (const auto& p : products) {
        const std::string pid = CorpusLayout::sanitize_id(p.entry.eu_number);
        auto pdfs = sorted_files(paths_.pdf_dir() / pid, ".pdf");
        if (!pdfs.empty()) any_pdfs = true;

        std::vector<SmpcVersion> versions;
        for (const auto& pdf : pdfs) {
            std::string stem = pdf.stem().string();
            auto date = date_from_stem(stem);
            if (!date) {
                log.warn("undated_pdf", "cannot read a version date from the filename",
                         {{"file", pdf.filename().string()}});
                continue;
            }
            try {
                PdfTextResult text = extract_pdf_text(read_file(pdf));
                for (const auto& w : text.warnings)
                    log.warn("pdf_warning", w, {{"file", pdf.filename().string()}});
                SectionSpan span = locate_section_4_8(text.text);
                SmpcVersion v;
                v.product_id = p.entry.eu_number;
                v.version_date = Date::parse_or_throw(*date);
                v.source_file = pdf.filename().string();
                v.full_text = std::move(text.text);
                v.section_4_8 = v.full_text.substr(span.start, span.end - span.start);
                versions.push_back(std::move(v));
            } catch (const Error& e) {
                log.error("section_failed", e.what(), {{"file", pdf.filename().string()}});
            }
        }
        if (versions.empty()) continue;

        versions = finalize_versions(std::move(versions), log);
        for (std::size_t i = 0; i < versions.size(); ++i) {
            bool is_latest = i + 1 == versions.size();
            store_version(layout, versions[i], is_latest, cfg_.run_timestamp, log);
            ++r.successes;
        }
    }
    if (!any_pdfs)
        throw PrerequisiteError("no PDFs under " + paths_.pdf_dir().string() +
                                "; run `fetch` first");
}

// extract: Section 4.8 texts -> parsed AE lists via the gateway.
void Pipeline::stage_extract(Log& log, StageResult& r) {
    require_input(cfg_.clean_rules, "clean rules file");
    auto gateway = make_gateway(log);
    const std::string prompt_template = prompt("extract_aes.txt");
    const CleanRules rules = load_clean_rules(cfg_.clean_rules);
    CorpusLayout layout{paths_.products};

    bool any_sections = false;
    for (const auto& product_dir : sorted_dirs(paths_.products)) {
        const std::string pid = product_dir.filename().string();
        for (bool is_latest : {true, false}) {
            fs::path dir = product_dir / (is_latest ? "latest" : "updates");
            for (const auto& txt : sorted_files(dir, ".txt")) {
                const std::string name = txt.filename().string();
                auto marker = name.find("_section48_");
                if (marker == std::string::npos) continue;
                any_sections = true;

                std::string base = name.substr(0, marker); // {pid}_{date}
                auto date = date_from_stem(base);
                if (!date) {
                    log.warn("undated_section", "cannot read a version date from the filename",
                             {{"file", name}});
                    continue;
                }
                // Folder names are sanitized; recover the registry identifier.
                std::string eu_number = pid;
                std::replace(eu_number.begin(), eu_number.end(), '-', '/');

                try {
                    SmpcVersion v;
                    v.product_id = eu_number;
                    v.version_date = Date::parse_or_throw(*date);
                    v.section_4_8 = read_file(txt);
                    v.source_file = pdf_name(pid, *date);
                    StoredPaths slots =
                        store_version(layout, v, is_latest, cfg_.run_timestamp, log);

                    auto terms = extract_aes(v.section_4_8, eu_number, *date, v.source_file,
                                             *gateway, cfg_.gateway, prompt_template, log);
                    auto cleaned = clean_terms(terms, rules, log);
                    write_file_if_changed(slots.parsed_csv, aes_to_csv(cleaned));
                    ++r.successes;
                } catch (const Error& e) {
                    log.error("extract_failed", e.what(), {{"file", name}});
                }
            }
        }
    }
    if (!any_sections)
        throw PrerequisiteError("no Section 4.8 texts under " + paths_.products.string() +
                                "; run `sections` first");
}

namespace {

// Every parsed-AE file in the corpus, grouped per product, versions sorted.
std::map<std::string, std::vector<fs::path>> parsed_ae_files(const fs::path& products_root) {
    std::map<std::string, std::vector<fs::path>> out;
    for (const auto& product_dir : sorted_dirs(products_root)) {
        std::vector<fs::path> files;
        for (const char* sub : {"latest", "updates"})
            for (const auto& f : sorted_files(product_dir / sub, ".csv"))
                if (f.filename().string().find("_aes_") != std::string::npos)
                    files.push_back(f);
        if (!files.empty()) out[product_dir.filename().string()] = std::move(files);
    }
    return out;
}

} // namespace

// map: unique raw terms -> hierarchy rows.
void Pipeline::stage_map(Log& log, StageResult& r) {
    require_input(cfg_.terminology_dir, "terminology directory");
    auto files = parsed_ae_files(paths_.products);
    if (files.empty())
        throw PrerequisiteError("no parsed AE files under " + paths_.products.string() +
                                "; run `extract` first");

    AxialityPolicy policy = cfg_.axiality_policy == "primary_flag" ? AxialityPolicy::PrimaryFlag
                                                                   : AxialityPolicy::LastLoaded;
    Hierarchy h = load_hierarchy(cfg_.terminology_dir, policy, log);

    // Unique raw terms, first-seen wording kept, output sorted for stability.
    std::vector<std::string> terms;
    std::set<std::string> seen;
    for (const auto& [pid, paths] : files)
        for (const auto& f : paths)
            for (const auto& ae : aes_from_csv(read_file(f)))
                if (seen.insert(norm_key(ae.text)).second) terms.push_back(ae.text);
    std::sort(terms.begin(), terms.end());

    auto gateway = make_gateway(log);
    MappingPrompts prompts{prompt("predict_socs.txt"), prompt("select_pt.txt")};

    std::vector<MappedTerm> mapping;
    for (const auto& term : terms) {
        MappedTerm m = map_term(term, h, *gateway, cfg_.gateway, prompts, log);
        if (m.method == MatchMethod::Error) {
            // map_term already logged the cause; the row still ships.
        } else {
            ++r.successes;
        }
        mapping.push_back(std::move(m));
    }

    if (!cfg_.overrides.empty()) {
        require_input(cfg_.overrides, "overrides file");
        mapping = apply_manual_overrides(mapping, load_overrides(read_file(cfg_.overrides)), h,
                                         log);
    }

    write_file_if_changed(paths_.mapping(), mapping_to_csv(mapping));
    write_provenance(paths_.mapping(), "map");
    log.info("map_done", "mapping table written",
             {{"terms", terms.size()}, {"path", paths_.mapping().string()}});
}

// timeline: per-version AE sets -> first-appearance entries + durations.
void Pipeline::stage_timeline(Log& log, StageResult& r) {
    require_file(paths_.product_list(), "product list", "index");
    require_file(paths_.mapping(), "mapping table", "map");
    auto files = parsed_ae_files(paths_.products);
    if (files.empty())
        throw PrerequisiteError("no parsed AE files under " + paths_.products.string() +
                                "; run `extract` first");

    auto products = product_list_from_csv(read_csv_file(paths_.product_list()));
    std::map<std::string, const EnrichedProduct*> by_pid;
    for (const auto& p : products)
        by_pid[CorpusLayout::sanitize_id(p.entry.eu_number)] = &p;

    std::map<std::string, std::string> pt_by_term;
    for (const auto& m : mapping_from_csv(read_file(paths_.mapping())))
        if (!m.pt_code.empty()) pt_by_term[norm_key(m.raw_term)] = m.pt_code;

    PracDates prac;
    if (!cfg_.prac_dates.empty()) {
        require_input(cfg_.prac_dates, "PRAC dates file");
        prac = load_prac_dates(read_file(cfg_.prac_dates));
    }

    std::vector<TimelineEntry> all_entries;
    std::vector<ProductHistory> histories;
    for (const auto& [pid, ae_files] : files) {
        auto prod = by_pid.find(pid);
        if (prod == by_pid.end()) {
            log.warn("orphan_product_dir", "no product list row for folder", {{"folder", pid}});
            continue;
        }
        const std::string eu_number = prod->second->entry.eu_number;

        // One AE set per version date; parsed rows carry their own dates.
        std::map<std::string, VersionedAeSet> by_date;
        for (const auto& f : ae_files) {
            for (const auto& ae : aes_from_csv(read_file(f))) {
                auto& v = by_date[ae.version_date];
                if (v.aes.empty()) {
                    v.product_id = eu_number;
                    v.version_date = Date::parse_or_throw(ae.version_date);
                    v.source_file = ae.source_file;
                }
                auto pt = pt_by_term.find(norm_key(ae.text));
                v.aes.emplace_back(ae.text, pt == pt_by_term.end() ? "" : pt->second);
            }
        }
        std::vector<VersionedAeSet> versions;
        ProductHistory history;
        history.product_id = eu_number;
        history.authorization_date = prod->second->approval_date;
        for (auto& [date, v] : by_date) {
            history.version_dates.push_back(date);
            versions.push_back(std::move(v));
        }
        if (versions.empty()) continue;
        versions.front().is_initial = true; // by_date iterates ascending

        try {
            auto entries = build_timeline(std::move(versions), log);
            all_entries.insert(all_entries.end(), entries.begin(), entries.end());
            histories.push_back(std::move(history));
            ++r.successes;
        } catch (const Error& e) {
            log.error("timeline_failed", e.what(), {{"eu_number", eu_number}});
        }
    }

    all_entries = attach_reference_dates(std::move(all_entries), prac, log);
    auto durations = first_update_durations(histories, data_lock_, log);

    write_file_if_changed(paths_.timeline(), timeline_to_csv(all_entries));
    write_file_if_changed(paths_.durations(), durations_to_csv(durations));
    write_provenance(paths_.timeline(), "timeline");
    log.info("timeline_done", "timeline written",
             {{"entries", all_entries.size()}, {"durations", durations.size()}});
}

// assemble: all prior outputs -> the 36-column association table.
void Pipeline::stage_assemble(Log& log, StageResult& r) {
    require_file(paths_.product_list(), "product list", "index");
    require_file(paths_.timeline(), "timeline table", "timeline");
    require_file(paths_.mapping(), "mapping table", "map");
    require_input(cfg_.atc_reference, "ATC reference table");

    AssembleInputs in;
    in.products = product_list_from_csv(read_csv_file(paths_.product_list()));
    in.timeline = timeline_from_csv(read_file(paths_.timeline()));
    in.mapping = mapping_from_csv(read_file(paths_.mapping()));
    in.atc_ref = load_atc_reference(read_file(cfg_.atc_reference));
    in.processed_mode = cfg_.processed_mode;

    for (const auto& p : in.products) {
        const std::string pid = CorpusLayout::sanitize_id(p.entry.eu_number);
        fs::path meta = paths_.products / pid / "metadata.json";
        fs::path procs = paths_.products / pid / "procedures.csv";
        if (fs::exists(meta))
            in.pages[p.entry.eu_number] = metadata_from_json(json::parse(read_file(meta)));
        if (fs::exists(procs))
            in.procedures[p.entry.eu_number] = procedures_from_csv(read_csv_file(procs));
    }

    AssembleResult result = assemble(in, log);
    ExportPaths exported =
        export_dataset(result.rows, paths_.dataset_dir, cfg_.run_timestamp, true, log);
    write_provenance(exported.csv, "assemble");
    if (!exported.xlsx.empty()) write_provenance(exported.xlsx, "assemble");

    json stats{{"rows_emitted", result.stats.rows_emitted},
               {"skipped_no_product", result.stats.skipped_no_product},
               {"excluded_inactive", result.stats.excluded_inactive},
               {"atc_failures", result.stats.atc_failures},
               {"unmatched_procedures", result.stats.unmatched_procedures}};
    write_file_if_changed(paths_.assemble_stats(), stats.dump(2) + "\n");
    r.successes = result.stats.rows_emitted;
}

// validate: latest extractions vs reviewer gold lists + mapping breakdown.
void Pipeline::stage_validate(Log& log, StageResult& r) {
    if (cfg_.gold_dir.empty()) {
        log.warn("no_gold", "no gold directory configured, validation skipped", {});
        return;
    }
    require_input(cfg_.gold_dir, "gold directory");
    require_file(paths_.mapping(), "mapping table", "map");

    std::vector<Verdict> all_verdicts;
    for (const auto& gold_file : sorted_files(cfg_.gold_dir, ".csv")) {
        const std::string pid = gold_file.stem().string();
        fs::path latest = paths_.products / pid / "latest";
        std::vector<std::string> extracted;
        bool found = false;
        for (const auto& f : sorted_files(latest, ".csv")) {
            if (f.filename().string().find("_aes_") == std::string::npos) continue;
            for (const auto& ae : aes_from_csv(read_file(f))) extracted.push_back(ae.text);
            found = true;
            break;
        }
        if (!found) {
            log.warn("gold_without_extraction", "no parsed latest version for gold file",
                     {{"product", pid}});
            continue;
        }
        std::vector<std::string> gold;
        for (const auto& row : parse_csv(read_file(gold_file)))
            for (const auto& cell : row)
                if (!trim(cell).empty()) gold.push_back(trim(cell));

        auto verdicts = judge(extracted, gold);
        all_verdicts.insert(all_verdicts.end(), verdicts.begin(), verdicts.end());
        ++r.successes;
    }

    ValidationReport report;
    report.category_counts = verdict_counts(all_verdicts);
    report.judged_items = all_verdicts.size();
    if (!all_verdicts.empty()) report.extraction_accuracy = accuracy(all_verdicts);
    report.mapping = mapping_breakdown(mapping_from_csv(read_file(paths_.mapping())));

    write_file_if_changed(paths_.validation_report(), report_to_json(report));
    write_provenance(paths_.validation_report(), "validate");
    log.info("validate_done", "validation report written",
             {{"judged", report.judged_items},
              {"accuracy", report.extraction_accuracy},
              {"mapping_success", report.mapping.success}});
}

// analyze: dataset -> per-panel tables and the summary metrics file.
void Pipeline::stage_analyze(Log& log, StageResult& r) {
    fs::path dataset_csv = paths_.dataset_dir / ("dataset_" + cfg_.run_timestamp + ".csv");
    require_file(dataset_csv, "assembled dataset", "assemble");
    require_file(paths_.durations(), "durations table", "timeline");

    auto rows = dataset_from_csv(read_file(dataset_csv));

    // Only products present in the dataset belong in the survival analysis.
    std::set<std::string> product_ids;
    for (const auto& row : rows) product_ids.insert(row.eu_num);
    std::vector<UpdateDuration> durations;
    for (const auto& d : durations_from_csv(read_file(paths_.durations())))
        if (product_ids.count(d.product_id)) durations.push_back(d);

    std::set<std::string> biologics;
    if (!cfg_.biologics.empty()) {
        require_input(cfg_.biologics, "biologics list");
        for (const auto& row : parse_csv(read_file(cfg_.biologics)))
            for (const auto& cell : row)
                if (!trim(cell).empty() && !equals_icase(trim(cell), "inn"))
                    biologics.insert(trim(cell));
    }

    auto written = write_analytics(rows, durations, biologics, data_lock_.year(),
                                   paths_.analytics_dir, log);
    json prov{{"config_hash", cfg_.config_hash},
              {"stage", "analyze"},
              {"tool_version", kToolVersion},
              {"axiality_policy", cfg_.axiality_policy},
              {"run_timestamp", cfg_.run_timestamp},
              {"files", json::array()}};
    for (const auto& p : written) prov["files"].push_back(p.filename().string());
    write_file_if_changed(paths_.analytics_dir / "provenance.json", prov.dump(2) + "\n");
    r.successes = written.size();
}

StageResult Pipeline::run_stage(const std::string& name) {
    fs::create_directories(paths_.logs);
    JsonlLog log(paths_.logs / (name + ".jsonl"), name);

    StageResult r;
    r.name = name;
    auto started = std::chrono::steady_clock::now();
    if (name == "index") stage_index(log, r);
    else if (name == "scrape") stage_scrape(log, r);
    else if (name == "fetch") stage_fetch(log, r);
    else if (name == "sections") stage_sections(log, r);
    else if (name == "extract") stage_extract(log, r);
    else if (name == "map") stage_map(log, r);
    else if (name == "timeline") stage_timeline(log, r);
    else if (name == "assemble") stage_assemble(log, r);
    else if (name == "validate") stage_validate(log, r);
    else if (name == "analyze") stage_analyze(log, r);
    else throw ConfigError("unknown stage '" + name + "'");

    r.duration_ms = static_cast<long>(std::chrono::duration_cast<std::chrono::milliseconds>(
                                          std::chrono::steady_clock::now() - started)
                                          .count());
    r.warnings = log.warnings();
    r.failures = log.errors();
    return r;
}

RunReport Pipeline::run(const std::string& name) {
    RunReport report;
    report.tool_version = kToolVersion;
    report.config_hash = cfg_.config_hash;

    std::vector<std::string> stages;
    if (name == "all") stages = kStageOrder;
    else stages.push_back(name);

    try {
        for (const auto& stage : stages) report.stages.push_back(run_stage(stage));
    } catch (...) {
        // Fatal: persist what ran before rethrowing so the report names the
        // stage that broke off.
        fs::create_directories(paths_.logs);
        write_file_atomic(paths_.run_report(), run_report_to_json(report));
        throw;
    }
    fs::create_directories(paths_.logs);
    write_file_atomic(paths_.run_report(), run_report_to_json(report));
    return report;
}

} // namespace aetrace
