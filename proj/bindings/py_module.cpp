// Python bindings for the operations notebooks reach for most: section
// location, identifier handling, term cleaning, validation scoring, survival
// estimation, ATC expansion and full pipeline runs. Heavy lifting stays in
// the C++ library; this layer only converts types.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "aetrace/ae_extractor.hpp"
#include "aetrace/analytics.hpp"
#include "aetrace/dataset.hpp"
#include "aetrace/errors.hpp"
#include "aetrace/pdf_text.hpp"
#include "aetrace/pipeline.hpp"
#include "aetrace/register_index.hpp"
#include "aetrace/smpc_corpus.hpp"
#include "aetrace/validation.hpp"

namespace py = pybind11;
using namespace aetrace;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Drug / adverse-event reference dataset pipeline";

    py::register_exception<Error>(m, "AetraceError");

    // --- section location -----------------------------------------------
    m.def(
        "locate_section_4_8",
        [](const std::string& text) {
            SectionSpan span = locate_section_4_8(text);
            return py::make_tuple(span.start, span.end);
        },
        py::arg("text"),
        "Locate the undesirable-effects section; returns (start, end) offsets.");
    m.def(
        "section_4_8_text",
        [](const std::string& text) {
            SectionSpan span = locate_section_4_8(text);
            return text.substr(span.start, span.end - span.start);
        },
        py::arg("text"), "The undesirable-effects section body of a label text.");

    // --- identifiers ------------------------------------------------------
    m.def(
        "parse_eu_number",
        [](const std::string& text) {
            EuNumber n = parse_eu_number(text);
            return py::make_tuple(n.year, n.nnn);
        },
        py::arg("text"), "Parse an EU/1/YY/NNN product number into (year, nnn).");
    m.def("build_product_url", &build_product_url, py::arg("nnn"),
          "Registry detail-page URL for a product number.");

    // --- documents --------------------------------------------------------
    m.def(
        "extract_pdf_text",
        [](const py::bytes& pdf) {
            PdfTextResult r = extract_pdf_text(std::string(pdf));
            return py::make_tuple(r.text, r.page_count, r.warnings);
        },
        py::arg("pdf_bytes"), "Extract text from a PDF; returns (text, pages, warnings).");

    // --- term cleaning ----------------------------------------------------
    m.def(
        "clean_term_text",
        [](const std::string& text, bool strip_parentheticals,
           const std::vector<std::string>& strip_patterns,
           const std::vector<std::string>& trailing_qualifiers) {
            CleanRules rules;
            rules.strip_parentheticals = strip_parentheticals;
            rules.strip_patterns = strip_patterns;
            rules.trailing_qualifiers = trailing_qualifiers;
            return clean_term_text(text, rules);
        },
        py::arg("text"), py::arg("strip_parentheticals") = true,
        py::arg("strip_patterns") = std::vector<std::string>{},
        py::arg("trailing_qualifiers") = std::vector<std::string>{},
        "Normalize one extracted adverse-event term.");

    // --- validation -------------------------------------------------------
    m.def(
        "judge",
        [](const std::vector<std::string>& extracted, const std::vector<std::string>& gold) {
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& v : judge(extracted, gold))
                out.emplace_back(v.item, to_string(v.category));
            return out;
        },
        py::arg("extracted"), py::arg("gold"),
        "Judge an extraction against a gold list; returns (item, category) pairs.");
    m.def(
        "accuracy",
        [](const std::vector<std::string>& extracted, const std::vector<std::string>& gold) {
            return accuracy(judge(extracted, gold));
        },
        py::arg("extracted"), py::arg("gold"),
        "Correct / all verdicts for one extraction run.");

    // --- survival ---------------------------------------------------------
    m.def(
        "km_estimate",
        [](const std::vector<std::pair<long, bool>>& observations) {
            std::vector<UpdateDuration> durations;
            for (const auto& [days, event] : observations)
                durations.push_back({"", days, event});
            SurvivalCurve c = km_estimate(durations);
            py::dict out;
            out["times"] = c.times;
            out["at_risk"] = c.at_risk;
            out["events"] = c.events;
            out["survival"] = c.survival;
            out["median"] = c.median ? py::cast(*c.median) : py::none();
            return out;
        },
        py::arg("observations"),
        "Product-limit survival estimate over (days, event_observed) pairs.");

    // --- ATC ----------------------------------------------------------------
    m.def(
        "expand_atc",
        [](const std::string& code, const std::map<std::string, std::string>& ref) {
            AtcClassification c = expand_atc(code, ref);
            py::dict out;
            out["l1"] = py::make_tuple(c.l1_code, c.l1_desc);
            out["l2"] = py::make_tuple(c.l2_code, c.l2_desc);
            out["l3"] = py::make_tuple(c.l3_code, c.l3_desc);
            out["l4"] = py::make_tuple(c.l4_code, c.l4_desc);
            out["l5"] = py::make_tuple(c.l5_code, c.l5_desc);
            return out;
        },
        py::arg("code"), py::arg("reference"),
        "Expand a level-5 ATC code into all five levels.");

    // --- pipeline -----------------------------------------------------------
    m.def(
        "run_pipeline",
        [](const std::filesystem::path& config_file, const std::string& stage) {
            Pipeline pipeline(load_run_config(config_file));
            RunReport report = pipeline.run(stage);
            py::list stages;
            for (const auto& s : report.stages) {
                py::dict d;
                d["name"] = s.name;
                d["successes"] = s.successes;
                d["failures"] = s.failures;
                d["warnings"] = s.warnings;
                d["duration_ms"] = s.duration_ms;
                stages.append(d);
            }
            py::dict out;
            out["tool_version"] = report.tool_version;
            out["config_hash"] = report.config_hash;
            out["stages"] = stages;
            return out;
        },
        py::arg("config_file"), py::arg("stage") = "all",
        "Run one pipeline stage (or 'all') against a run config file.");
}
