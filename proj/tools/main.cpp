// aetrace: build the drug / adverse-event reference dataset from versioned
// product-label documents. Each subcommand runs one pipeline stage against a
// shared config; `all` runs every stage in order. Stage boundaries are files,
// so a stage can be re-run in isolation once its inputs exist.
//
// Exit codes: 0 clean, 1 fatal error, 2 completed with warnings.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "aetrace/errors.hpp"
#include "aetrace/pipeline.hpp"
#include "aetrace/version.hpp"

namespace {

int run(const std::string& config_file, const std::string& stage) {
    aetrace::RunConfig cfg = aetrace::load_run_config(config_file);
    aetrace::Pipeline pipeline(std::move(cfg));
    aetrace::RunReport report = pipeline.run(stage);

    std::size_t warnings = 0;
    std::size_t failures = 0;
    for (const auto& s : report.stages) {
        warnings += s.warnings;
        failures += s.failures;
        std::fprintf(stderr, "stage %-9s ok=%zu failed=%zu warned=%zu (%ld ms)\n",
                     s.name.c_str(), s.successes, s.failures, s.warnings, s.duration_ms);
    }
    return warnings + failures > 0 ? 2 : 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"aetrace: time-indexed drug/adverse-event dataset builder"};
    app.set_version_flag("--version", aetrace::kToolVersion);
    app.require_subcommand(1);

    std::string config_file;
    std::string stage;
    for (const auto& name : aetrace::kStageOrder) {
        auto* sub = app.add_subcommand(name, "run the " + name + " stage");
        sub->add_option("-c,--config", config_file, "run config file")->required();
        sub->callback([&stage, name] { stage = name; });
    }
    auto* all = app.add_subcommand("all", "run every stage in order");
    all->add_option("-c,--config", config_file, "run config file")->required();
    all->callback([&stage] { stage = "all"; });

    CLI11_PARSE(app, argc, argv);

    try {
        return run(config_file, stage);
    } catch (const aetrace::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "unexpected error: %s\n", e.what());
        return 1;
    }
}
