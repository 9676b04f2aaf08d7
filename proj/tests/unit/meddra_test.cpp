#include <doctest.h>

#include "aetrace/errors.hpp"
#include "aetrace/fsutil.hpp"
#include "aetrace/meddra.hpp"
#include "aetrace/strings.hpp"
#include "test_util.hpp"

using namespace aetrace;

namespace {

// Writes a minimal terminology directory from raw file bodies.
struct AscDir {
    testutil::TempDir dir;

    AscDir(const std::string& pt, const std::string& hlt, const std::string& hlgt,
           const std::string& soc, const std::string& hlt_pt, const std::string& hlgt_hlt,
           const std::string& soc_hlgt) {
        write_file(dir / "pt.asc", pt);
        write_file(dir / "hlt.asc", hlt);
        write_file(dir / "hlgt.asc", hlgt);
        write_file(dir / "soc.asc", soc);
        write_file(dir / "hlt_pt.asc", hlt_pt);
        write_file(dir / "hlgt_hlt.asc", hlgt_hlt);
        write_file(dir / "soc_hlgt.asc", soc_hlgt);
    }
};

// One PT under two HLT chains landing in two different SOCs. The flagged row
// comes first; the unflagged row is loaded last.
AscDir two_axis_dir() {
    return AscDir("10000001$Pyrexia\n",
                  "20000001$Febrile disorders\n20000002$Fever of infectious origin\n",
                  "30000001$General system disorders NEC\n30000002$Infections NEC\n",
                  "40000001$General disorders\n40000002$Infections and infestations\n",
                  "20000001$10000001$Y\n20000002$10000001$\n",
                  "30000001$20000001\n30000002$20000002\n",
                  "40000001$30000001\n40000002$30000002\n");
}

const std::string kSelectTemplate = "TERM={{TERM}}\nCANDIDATES:\n{{CANDIDATES}}\nPick one.";
const std::string kPredictTemplate = "TERM={{TERM}}\nSOCS:\n{{SOC_LIST}}\nName up to three.";

} // namespace

TEST_CASE("fixture hierarchy loads with the expected level counts") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    CHECK(h.pt_names.size() == 50);
    CHECK(h.hlt_names.size() == 20);
    CHECK(h.hlgt_names.size() == 12);
    CHECK(h.soc_names.size() == 9);
    CHECK(h.soc_list.size() == 9);
    CHECK(h.soc_list.front().second ==
          "General disorders and administration site conditions"); // file order kept
    CHECK(h.pt_names.at("10037660") == "Pyrexia");
}

TEST_CASE("missing terminology files are named in the error") {
    testutil::TempDir dir;
    write_file(dir / "pt.asc", "10000001$Pyrexia\n");
    try {
        load_hierarchy(dir, AxialityPolicy::LastLoaded);
        FAIL("expected LoadError");
    } catch (const LoadError& e) {
        CHECK(std::string(e.what()).find("hlt.asc") != std::string::npos);
    }
}

TEST_CASE("last-loaded policy lets the final linkage row win") {
    auto fixture = two_axis_dir();
    auto h = load_hierarchy(fixture.dir, AxialityPolicy::LastLoaded);
    CHECK(h.pt_to_hlt.at("10000001") == "20000002"); // the unflagged, later row
    auto path = resolve_hierarchy("10000001", h);
    CHECK(path.soc_term == "Infections and infestations");
}

TEST_CASE("primary-flag policy locks on the flagged row regardless of order") {
    auto fixture = two_axis_dir();
    auto h = load_hierarchy(fixture.dir, AxialityPolicy::PrimaryFlag);
    CHECK(h.pt_to_hlt.at("10000001") == "20000001"); // the Y-flagged row
    auto path = resolve_hierarchy("10000001", h);
    CHECK(path.soc_term == "General disorders");
}

TEST_CASE("the checked-in multi-axial PT resolves differently under each policy") {
    auto last = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    auto primary = load_hierarchy(testutil::fixtures_dir() / "meddra",
                                  AxialityPolicy::PrimaryFlag);
    CHECK(resolve_hierarchy("10037660", last).soc_term == "Infections and infestations");
    CHECK(resolve_hierarchy("10037660", primary).soc_term ==
          "General disorders and administration site conditions");
    // Single-axis PTs resolve identically either way.
    CHECK(resolve_hierarchy("10019211", last).soc_term ==
          resolve_hierarchy("10019211", primary).soc_term);
}

TEST_CASE("duplicate primary flags warn and keep the first") {
    AscDir fixture("10000001$Pyrexia\n",
                   "20000001$A\n20000002$B\n",
                   "30000001$GA\n30000002$GB\n",
                   "40000001$SA\n40000002$SB\n",
                   "20000001$10000001$Y\n20000002$10000001$Y\n",
                   "30000001$20000001\n30000002$20000002\n",
                   "40000001$30000001\n40000002$30000002\n");
    MemoryLog log;
    auto h = load_hierarchy(fixture.dir, AxialityPolicy::PrimaryFlag, log);
    CHECK(h.pt_to_hlt.at("10000001") == "20000001");
    CHECK(log.has_event("duplicate_primary"));
}

TEST_CASE("reverse index is the exact inverse of chain resolution") {
    for (auto policy : {AxialityPolicy::LastLoaded, AxialityPolicy::PrimaryFlag}) {
        auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", policy);
        size_t indexed = 0;
        for (const auto& [soc, pts] : h.reverse_index) indexed += pts.size();
        CHECK(indexed == h.pt_names.size()); // every PT lands in exactly one SOC
        for (const auto& [soc, pts] : h.reverse_index) {
            for (const auto& pt : pts) CHECK(resolve_hierarchy(pt, h).soc_code == soc);
        }
    }
}

TEST_CASE("exact match ignores case and whitespace padding") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    CHECK(match_exact("Pyrexia", h) == "10037660");
    CHECK(match_exact("pyrexia", h) == "10037660");
    CHECK(match_exact("  PYREXIA  ", h) == "10037660");
    CHECK_FALSE(match_exact("feeling feverish", h).has_value());
    CHECK_FALSE(match_exact("", h).has_value());
}

TEST_CASE("resolve_hierarchy names the level that breaks") {
    AscDir fixture("10000001$Orphan\n", "20000001$H\n", "30000001$G\n", "40000001$S\n",
                   "20000009$10000001$Y\n", // parent HLT has no name entry
                   "30000001$20000001\n", "40000001$30000001\n");
    auto h = load_hierarchy(fixture.dir, AxialityPolicy::LastLoaded);
    CHECK_THROWS_AS(resolve_hierarchy("10000001", h), HierarchyError);
    CHECK_THROWS_AS(resolve_hierarchy("99999999", h), HierarchyError); // unknown PT
}

TEST_CASE("predict_socs validates names, drops unknowns and caps at three") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    StubGateway stub;
    std::vector<std::string> names;
    for (const auto& [code, name] : h.soc_list) names.push_back(name);
    std::string prompt = "TERM=Feeling feverish\nSOCS:\n" + join(names, "\n") +
                         "\nName up to three.";
    stub.add_response_for_prompt(prompt,
                                 "Infections and infestations\n"
                                 "NERVOUS SYSTEM DISORDERS\n" // case-insensitive
                                 "Completely made up organ class\n"
                                 "Gastrointestinal disorders\n"
                                 "Psychiatric disorders\n");
    MemoryLog log;
    auto socs = predict_socs("Feeling feverish", stub, cfg, h, kPredictTemplate, log);
    REQUIRE(socs.size() == 3); // capped
    CHECK(socs[0] == "10021881");
    CHECK(socs[1] == "10029205");
    CHECK(socs[2] == "10017947");
    CHECK(log.has_event("unknown_soc"));
}

TEST_CASE("soc-filtered match batches candidates and runs a final round") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    cfg.max_context = 24; // tiny budget forces several batches over the pool
    StubGateway stub;
    stub.set_fallback([](const std::string& prompt) {
        // Prefer Pyrexia when offered, otherwise take the first candidate.
        auto start = prompt.find("CANDIDATES:\n");
        if (start == std::string::npos) return std::string();
        auto body = prompt.substr(start + 12, prompt.find("\nPick one.") - start - 12);
        if (body.find("Pyrexia") != std::string::npos) return std::string("Pyrexia");
        return std::string(body.substr(0, body.find('\n')));
    });

    // Pool: every PT under the general-disorders SOC plus the infections SOC.
    auto code = match_soc_filtered("Feeling feverish", {"10018065", "10021881"}, stub, cfg, h,
                                   kSelectTemplate);
    REQUIRE(code.has_value());
    CHECK(*code == "10037660");
    CHECK(stub.calls() >= 3); // at least two batches plus a final round

    // A roomy budget answers in a single call.
    StubGateway single;
    single.set_fallback([](const std::string&) { return std::string("Pyrexia"); });
    GatewayConfig big;
    auto code2 = match_soc_filtered("Feeling feverish", {"10018065", "10021881"}, single, big, h,
                                    kSelectTemplate);
    CHECK(code2 == "10037660");
    CHECK(single.calls() == 1);
}

TEST_CASE("selections outside the candidate batch are rejected") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    StubGateway stub;
    stub.set_fallback([](const std::string&) { return std::string("None"); });
    MemoryLog log;
    auto code = match_soc_filtered("Mystery term", {"10029205"}, stub, cfg, h, kSelectTemplate,
                                   log);
    CHECK_FALSE(code.has_value());
    CHECK(log.has_event("invalid_selection"));

    // An empty SOC list means an empty pool: no gateway call at all.
    StubGateway untouched;
    CHECK_FALSE(match_soc_filtered("Mystery term", {}, untouched, cfg, h, kSelectTemplate)
                    .has_value());
    CHECK(untouched.calls() == 0);
}

TEST_CASE("map_term runs exact match before consulting the gateway") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    StubGateway stub; // unscripted: any call would throw
    MappingPrompts prompts{kPredictTemplate, kSelectTemplate};
    auto mapped = map_term("pyrexia", h, stub, cfg, prompts);
    CHECK(mapped.method == MatchMethod::ExactMatch);
    CHECK(mapped.pt_code == "10037660");
    CHECK(mapped.pt_term == "Pyrexia");
    CHECK(mapped.soc_term == "Infections and infestations");
    CHECK(mapped.hlt_code == "30000002");
    CHECK(stub.calls() == 0);
}

TEST_CASE("map_term degrades gateway failures to Error rows") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    StubGateway stub; // unscripted: prediction call raises GatewayError
    MappingPrompts prompts{kPredictTemplate, kSelectTemplate};
    MemoryLog log;
    auto mapped = map_term("feeling warm", h, stub, cfg, prompts, log);
    CHECK(mapped.method == MatchMethod::Error);
    CHECK(mapped.pt_code.empty());
    CHECK(log.count(LogLevel::Error) >= 1);
}

TEST_CASE("map_term leaves terms with no predicted SOC unmatched") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    GatewayConfig cfg;
    StubGateway stub;
    stub.set_fallback([](const std::string&) { return std::string(""); });
    MappingPrompts prompts{kPredictTemplate, kSelectTemplate};
    auto mapped = map_term("tingling of extremities", h, stub, cfg, prompts);
    CHECK(mapped.method == MatchMethod::Unmatched);
    CHECK(mapped.raw_term == "tingling of extremities");
    CHECK(mapped.pt_code.empty());
}

TEST_CASE("mapping csv round-trips every method literal") {
    auto h = load_hierarchy(testutil::fixtures_dir() / "meddra", AxialityPolicy::LastLoaded);
    auto path = resolve_hierarchy("10037660", h);
    std::vector<MappedTerm> rows = {
        {"feeling feverish", path.pt_term, path.pt_code, path.hlt_term, path.hlt_code,
         path.hlgt_term, path.hlgt_code, path.soc_term, path.soc_code,
         MatchMethod::SocFilteredMatch},
        {"pyrexia", path.pt_term, path.pt_code, path.hlt_term, path.hlt_code, path.hlgt_term,
         path.hlgt_code, path.soc_term, path.soc_code, MatchMethod::ExactMatch},
        {"odd term", "", "", "", "", "", "", "", "", MatchMethod::Unmatched},
        {"failed term", "", "", "", "", "", "", "", "", MatchMethod::Error},
        {"fixed term", path.pt_term, path.pt_code, path.hlt_term, path.hlt_code,
         path.hlgt_term, path.hlgt_code, path.soc_term, path.soc_code, MatchMethod::Manual},
    };
    auto back = mapping_from_csv(mapping_to_csv(rows));
    CHECK(back == rows);
}

TEST_CASE("match method literals round-trip") {
    for (auto m : {MatchMethod::ExactMatch, MatchMethod::SocFilteredMatch, MatchMethod::Manual,
                   MatchMethod::Unmatched, MatchMethod::Error}) {
        CHECK(match_method_from_string(to_string(m)) == m);
    }
    CHECK(to_string(MatchMethod::ExactMatch) == "Exact Match");
    CHECK(to_string(MatchMethod::SocFilteredMatch) == "SOC-Filtered Match");
}
