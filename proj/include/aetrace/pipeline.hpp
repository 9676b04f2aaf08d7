#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "aetrace/dates.hpp"
#include "aetrace/gateway.hpp"
#include "aetrace/logging.hpp"
#include "aetrace/transport.hpp"

namespace aetrace {

// Everything one run needs, loaded from a structured config file. Relative
// paths resolve against the config file's directory.
struct RunConfig {
    std::filesystem::path corpus_root;
    std::string data_lock_date = "2025-12-15";
    std::string run_timestamp; // pinned for reproducible runs; generated when empty
    bool processed_mode = true; // active products only in the assembled dataset
    int parallelism = 1;
    std::string axiality_policy = "last_loaded"; // or "primary_flag"

    FetchPolicy fetch;
    std::string transport_mode = "http"; // or "replay"
    std::filesystem::path replay_dir;

    std::string gateway_mode = "http"; // or "stub"
    std::filesystem::path stub_responses;
    GatewayConfig gateway;
    std::filesystem::path cache_dir;

    // Input assets.
    std::filesystem::path brand_index;
    std::filesystem::path ema_report;
    std::filesystem::path terminology_dir;
    std::filesystem::path atc_reference;
    std::filesystem::path biologics;
    std::filesystem::path prac_dates; // optional
    std::filesystem::path gold_dir;   // optional; validate needs it
    std::filesystem::path overrides;  // optional
    std::filesystem::path prompts_dir;
    std::filesystem::path clean_rules;

    // Canonical serialized form of the file as loaded, for provenance.
    std::string canonical_json;
    std::string config_hash;
};

RunConfig load_run_config(const std::filesystem::path& config_file);

// Well-known locations inside the corpus tree.
struct CorpusPaths {
    explicit CorpusPaths(std::filesystem::path root);

    std::filesystem::path root;
    std::filesystem::path products;  // per-product folders
    std::filesystem::path work;      // intermediate stage outputs
    std::filesystem::path logs;
    std::filesystem::path dataset_dir;
    std::filesystem::path analytics_dir;

    std::filesystem::path product_list() const { return work / "product_list.csv"; }
    std::filesystem::path pdf_dir() const { return work / "pdfs"; }
    std::filesystem::path mapping() const { return work / "mapping.csv"; }
    std::filesystem::path timeline() const { return work / "timeline.csv"; }
    std::filesystem::path durations() const { return work / "durations.csv"; }
    std::filesystem::path assemble_stats() const { return work / "assemble_stats.json"; }
    std::filesystem::path validation_report() const { return work / "validation_report.json"; }
    std::filesystem::path run_report() const { return logs / "run_report.json"; }
};

struct StageResult {
    std::string name;
    std::size_t successes = 0;
    std::size_t failures = 0;
    std::size_t warnings = 0;
    long duration_ms = 0;
};

struct RunReport {
    std::string tool_version;
    std::string config_hash;
    std::vector<StageResult> stages;
};

std::string run_report_to_json(const RunReport& report);

extern const std::vector<std::string> kStageOrder; // index .. analyze

// Runs pipeline stages over a shared config. Stage boundaries are files in
// the corpus tree, so any stage can run in isolation once its inputs exist;
// missing inputs raise PrerequisiteError naming the stage to run first.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg);

    // `name` is one stage or "all". Returns the per-stage tallies; the run
    // report is also written under logs/.
    RunReport run(const std::string& name);

    const CorpusPaths& paths() const { return paths_; }

private:
    StageResult run_stage(const std::string& name);

    void stage_index(Log& log, StageResult& r);
    void stage_scrape(Log& log, StageResult& r);
    void stage_fetch(Log& log, StageResult& r);
    void stage_sections(Log& log, StageResult& r);
    void stage_extract(Log& log, StageResult& r);
    void stage_map(Log& log, StageResult& r);
    void stage_timeline(Log& log, StageResult& r);
    void stage_assemble(Log& log, StageResult& r);
    void stage_validate(Log& log, StageResult& r);
    void stage_analyze(Log& log, StageResult& r);

    std::unique_ptr<Transport> make_transport() const;
    std::shared_ptr<TextModelGateway> make_gateway(Log& log) const;
    void write_provenance(const std::filesystem::path& output, const std::string& stage) const;
    std::string prompt(const std::string& name) const;

    RunConfig cfg_;
    CorpusPaths paths_;
    Date data_lock_;
};

} // namespace aetrace
