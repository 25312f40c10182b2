// SPDX-License-Identifier: Apache-2.0
#include "battery.hpp"
#include "corpus_gen.hpp"
#include "safepdf/extract/extract.hpp"
#include "safepdf/verdict/corpus.hpp"
#include "safepdf/verdict/forge.hpp"
#include "safepdf/verdict/scan.hpp"

#include <doctest.h>
#include <json.hpp>

#include <chrono>
#include <random>

using namespace safepdf;
using namespace safepdf::verdict;
using safepdf::test::data_dir;
using safepdf::test::read_file;

namespace {

std::string script(std::string const& group, std::string const& name)
{
    return read_file(data_dir() / "scripts" / group / (name + ".js"));
}

Report scan_js(std::string const& js, Config const& config = {})
{
    return scan_bytes(forge_document(js, variant_specs().front()), config, "inline");
}

bool has_kind(Verdict const& v, std::string_view kind)
{
    return std::any_of(v.evidence.begin(), v.evidence.end(), [&](auto const& e) { return e.kind == kind; });
}

std::filesystem::path scratch(std::string const& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("safepdf-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

interp::BehaviorEvent event(interp::EventKind kind, uint64_t size = 0)
{
    interp::BehaviorEvent e;
    e.kind = kind;
    e.size = size;
    e.detail = std::string(interp::event_kind_name(kind));
    return e;
}

}

TEST_SUITE("verdict")
{
    TEST_CASE("classify flags each behavior class")
    {
        using interp::EventKind;
        Thresholds t;
        interp::Outcome clean;
        CHECK(classify(clean, t).label == Label::Benign);
        CHECK(classify(clean, t).cause == Cause::Clean);

        interp::Outcome whitelisted;
        auto call = event(EventKind::ApiCall);
        call.detail = "app.alert";
        whitelisted.log.add(call);
        CHECK(classify(whitelisted, t).label == Label::Benign);

        interp::Outcome vulnerable;
        call.safety = model::Safety::Vulnerable;
        vulnerable.log.add(call);
        CHECK(classify(vulnerable, t).cause == Cause::MaliciousBehavior);

        interp::Outcome small;
        small.log.add(event(EventKind::LargeString, 65536));
        small.log.add(event(EventKind::LargeObject, 4000));
        CHECK(classify(small, t).label == Label::Benign);

        interp::Outcome big;
        big.log.add(event(EventKind::LargeString, 65537));
        CHECK(classify(big, t).cause == Cause::MaliciousBehavior);

        interp::Outcome odd;
        odd.log.add(event(EventKind::UnexpectedBehavior));
        CHECK(classify(odd, t).cause == Cause::UnexpectedBehavior);

        interp::Outcome stuck;
        stuck.not_reached = interp::NotReached::Timeout;
        stuck.log.add(event(EventKind::EvalLike));
        stuck.log.add(event(EventKind::UnexpectedBehavior));
        auto v = classify(stuck, t);
        CHECK(v.cause == Cause::FixpointNotReached);
        CHECK(v.causes == std::vector<Cause> { Cause::FixpointNotReached, Cause::MaliciousBehavior, Cause::UnexpectedBehavior });
        CHECK(v.evidence.size() == 3);
        CHECK(v.evidence.front().detail == "Timeout");

        auto failed = classify(PipelineFailure { Cause::JsParsingError, "unexpected token", 0, {} });
        CHECK(failed.label == Label::Malicious);
        CHECK(failed.cause == Cause::JsParsingError);
    }

    TEST_CASE("benign exactly when there is no evidence")
    {
        std::mt19937 rng(3);
        for (int i = 0; i < 2000; ++i) {
            std::vector<Evidence> evidence(rng() % 4);
            for (auto& e : evidence)
                e.cause = static_cast<Cause>(rng() % 5);
            auto v = make_verdict(evidence);
            CHECK((v.label == Label::Benign) == evidence.empty());
            CHECK((v.cause == Cause::Clean) == (v.label == Label::Benign));
            if (!evidence.empty()) {
                auto best = std::min_element(evidence.begin(), evidence.end(),
                                             [](auto const& a, auto const& b) { return a.cause < b.cause; });
                CHECK(v.cause == best->cause);
            }
        }
    }

    TEST_CASE("lower thresholds never clear a malicious verdict")
    {
        using interp::EventKind;
        std::mt19937_64 rng(17);
        for (int i = 0; i < 1000; ++i) {
            interp::Outcome out;
            for (int n = static_cast<int>(rng() % 4); n > 0; --n) {
                auto e = event(rng() % 2 ? EventKind::LargeString : EventKind::LargeObject, rng() % 200000);
                e.span.start = static_cast<uint32_t>(n);
                out.log.add(e);
            }
            Thresholds high;
            high.max_string_length = 1 + rng() % 200000;
            high.max_object_size = 1 + rng() % 200000;
            Thresholds low = high;
            low.max_string_length = 1 + rng() % high.max_string_length;
            low.max_object_size = 1 + rng() % high.max_object_size;
            if (classify(out, high).label == Label::Malicious)
                CHECK(classify(out, low).label == Label::Malicious);
        }
    }

    TEST_CASE("script fixtures get the expected cause")
    {
        struct Case {
            char const* name;
            Cause cause;
            char const* kind;
        } const cases[] = {
            { "eval_alias", Cause::MaliciousBehavior, "EvalLike" },
            { "computed_send", Cause::MaliciousBehavior, "ApiCall" },
            { "unescape_spray", Cause::MaliciousBehavior, "LargeString" },
            { "version_guard", Cause::MaliciousBehavior, "ApiCall" },
            { "unresolved_lookup", Cause::UnexpectedBehavior, "UnexpectedBehavior" },
            { "broken_syntax", Cause::JsParsingError, "JsParsingError" },
            { "big_array", Cause::MaliciousBehavior, "LargeObject" },
        };
        for (auto const& c : cases) {
            CAPTURE(c.name);
            auto report = scan_js(script("malicious", c.name));
            CHECK(report.verdict.label == Label::Malicious);
            CHECK(report.verdict.cause == c.cause);
            CHECK(has_kind(report.verdict, c.kind));
        }
        auto eval = scan_js(script("malicious", "eval_alias"));
        auto it = std::find_if(eval.verdict.evidence.begin(), eval.verdict.evidence.end(),
                               [](auto const& e) { return e.kind == "EvalLike"; });
        REQUIRE(it != eval.verdict.evidence.end());
        CHECK(it->args == std::vector<std::string> { "\"featureA.newObject(size)\"" });
        REQUIRE(it->span.has_value());
        CHECK(it->span->line == 3);
    }

    TEST_CASE("benign documents are clean")
    {
        for (auto const& path : test::scripts_in("benign")) {
            CAPTURE(path.filename().string());
            auto report = scan_js(read_file(path));
            CHECK(report.verdict.label == Label::Benign);
            CHECK(report.verdict.evidence.empty());
        }
        auto empty = scan_js("");
        CHECK(empty.verdict.cause == Cause::Clean);
        REQUIRE(empty.scripts.size() == 1);
        CHECK(empty.scripts[0].length == 0);
        CHECK(scan_bytes(test::no_script_document()).verdict.cause == Cause::Clean);
    }

    TEST_CASE("invalid /JS values and unreadable input are malicious")
    {
        std::string pdf = "%PDF-1.4\n1 0 obj <</Type/Catalog/OpenAction<</S/JavaScript/JS 42>>>> endobj\n"
                          "trailer <</Root 1 0 R>>\n";
        auto report = scan_bytes(pdf);
        CHECK(report.verdict.cause == Cause::UnexpectedBehavior);
        CHECK(has_kind(report.verdict, "InvalidScript"));

        auto garbage = scan_bytes("not a pdf at all");
        CHECK(garbage.verdict.cause == Cause::ExtractionError);
        CHECK(garbage.malicious());
    }

    TEST_CASE("I/O errors are not verdicts")
    {
        auto report = scan(data_dir() / "does-not-exist.pdf");
        CHECK(report.status == ReportStatus::IoError);
        CHECK(!report.malicious());
        auto json = nlohmann::json::parse(report_json(report));
        CHECK(json["status"] == "io_error");
        CHECK(!json.contains("verdict"));
        CHECK(scan(data_dir()).status == ReportStatus::IoError);
    }

    TEST_CASE("reports are deterministic and carry the configuration")
    {
        auto dir = scratch("determinism");
        auto path = dir / "doc.pdf";
        std::ofstream(path, std::ios::binary) << forge_document(script("malicious", "unescape_spray"), variant_specs()[5]);
        Config config;
        auto a = scan(path, config);
        auto b = scan(path, config);
        CHECK(report_json(a, false) == report_json(b, false));

        auto json = nlohmann::json::parse(report_json(a));
        CHECK(json["report_version"] == 1);
        CHECK(json["verdict"] == "malicious");
        CHECK(json["config"]["max_string_length"] == 65536);
        CHECK(json["config"]["registry"] == model::default_registry().fingerprint());
        for (char const* stage : { "parse_pdf", "extract", "parse_js", "model", "analyze", "classify" })
            CHECK(json["timings"].contains(stage));
        auto const& ev = json["evidence"][0];
        CHECK(ev["kind"] == "LargeString");
        CHECK(ev["size"] == "unbounded");
        CHECK(ev["origin"]["path"] == "/Root/OpenAction/JS");
        CHECK(ev["span"]["line"].get<int>() >= 1);
        CHECK(report_text(a).find("LargeString") != std::string::npos);
    }

    TEST_CASE("report keys follow the shipped schema")
    {
        auto schema = nlohmann::json::parse(read_file(data_dir().parent_path().parent_path() / "docs" / "report_schema.json"));
        auto conforms = [&](nlohmann::json const& report) {
            for (auto const& [key, value] : report.items())
                CHECK_MESSAGE(schema["properties"].contains(key), key);
            auto const& required = report["status"] == "analyzed" ? schema["then"]["required"] : schema["else"]["required"];
            for (auto const& key : schema["required"])
                CHECK(report.contains(key.get<std::string>()));
            for (auto const& key : required)
                CHECK(report.contains(key.get<std::string>()));
            for (auto const& e : report.value("evidence", nlohmann::json::array()))
                for (auto const& [key, value] : e.items())
                    CHECK_MESSAGE(schema["$defs"]["evidence"]["properties"].contains(key), key);
        };
        CHECK(schema["properties"]["report_version"]["const"] == Report::version);
        conforms(nlohmann::json::parse(report_json(scan_js(script("malicious", "eval_alias")))));
        conforms(nlohmann::json::parse(report_json(scan_js(script("malicious", "unescape_spray")))));
        conforms(nlohmann::json::parse(report_json(scan(data_dir() / "does-not-exist.pdf"))));
    }

    TEST_CASE("document field names sharpen the model")
    {
        auto report = scan_bytes(test::field_document("zip", script("benign", "zip_check")));
        CHECK(report.verdict.label == Label::Benign);
        REQUIRE(report.scripts.size() == 1);
        CHECK(report.scripts[0].entry_kind == "FieldAction");
        CHECK(report.scripts[0].event == "Keystroke");
    }

    TEST_CASE("allowlisted fragments are removed only when configured")
    {
        std::string js = "var x = 1;\njQuery.post(url, data);\napp.alert(x);";
        CHECK(scan_js(js).verdict.label == Label::Malicious);
        Config config;
        config.allowlist = { "jQuery.post(url, data);" };
        auto report = scan_js(js, config);
        CHECK(report.verdict.label == Label::Benign);
        CHECK(report.notes.size() == 1);

        auto dir = scratch("allowlist");
        std::ofstream(dir / "allow.txt") << "# fragments\n\njQuery.post(url, data);\r\n";
        CHECK(load_allowlist(dir / "allow.txt") == std::vector<std::string> { "jQuery.post(url, data);" });
    }

    TEST_CASE("budget exhaustion yields FixpointNotReached in time")
    {
        std::string js = "var s = 0;\n"
                         "for (var a = 0; a < 100000; a++) for (var b = 0; b < 100000; b++) for (var c = 0; c < 1000; c++) s++;\n";
        Config config;
        config.thresholds.analysis_timeout_s = 0.5;
        auto start = std::chrono::steady_clock::now();
        auto report = scan_js(js, config);
        double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        CHECK(report.verdict.cause == Cause::FixpointNotReached);
        CHECK(took < 0.5 + 1.0);
    }
}

TEST_SUITE("forge")
{
    TEST_CASE("variants extract exactly the payload")
    {
        auto dir = scratch("forge");
        for (std::string js : { "app.alert(1)", "", "var s = \"\\u00e9t\\u00e9 (x) \\\\ y\";\nfeatureB.sendMessage(s);" }) {
            CAPTURE(js);
            auto files = forge_variants(js, dir);
            REQUIRE(files.size() == 11);
            for (auto const& f : files) {
                CAPTURE(f.variant);
                CHECK(f.plaintext == js);
                auto unit = extract::extract_scripts(pdf::parse_document(read_file(f.path)));
                REQUIRE(unit.script_count() == 1);
                auto const& s = unit.preamble.empty() ? unit.handlers[0] : unit.preamble[0];
                CHECK(s.source_text == js);
            }
            auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
            CHECK(manifest.size() == 11);
            CHECK(manifest[4]["plaintext"] == js);
        }
    }

    TEST_CASE("variant structure")
    {
        std::string const js = "app.alert(2)";
        auto r6 = pdf::parse_document(forge_document(js, variant_specs()[4]));
        REQUIRE(r6.encryption().has_value());
        CHECK(r6.encryption()->handler_revision == 6);
        auto r5 = pdf::parse_document(forge_document(js, variant_specs()[9]));
        CHECK(r5.encryption()->handler_revision == 5);
        auto hex = extract::extract_scripts(pdf::parse_document(forge_document(js, variant_specs()[7])));
        CHECK(hex.preamble.at(0).encoding_used == extract::TextEncoding::HexUtf16BE);
        auto mimic = extract::extract_scripts(pdf::parse_document(forge_document(js, variant_specs()[10])));
        REQUIRE(mimic.handlers.size() == 1);
        CHECK(mimic.handlers[0].entry_kind == extract::EntryKind::AnnotationAction);
        CHECK(mimic.preamble.empty());
        // same input, same bytes
        CHECK(forge_document(js, variant_specs()[6]) == forge_document(js, variant_specs()[6]));
    }

    TEST_CASE("every variant gets the plain verdict")
    {
        for (char const* group : { "benign", "malicious" }) {
            for (auto const& path : test::scripts_in(group)) {
                std::string js = read_file(path);
                auto plain = scan_js(js);
                for (auto const& spec : variant_specs()) {
                    CAPTURE(path.filename().string());
                    CAPTURE(spec.name);
                    auto report = scan_bytes(forge_document(js, spec));
                    CHECK(report.verdict.label == plain.verdict.label);
                    CHECK(report.verdict.cause == plain.verdict.cause);
                }
            }
        }
    }
}

TEST_SUITE("corpus")
{
    TEST_CASE("metric formulas")
    {
        CorpusMetrics m { 5, 0, 5, 0, 0 };
        CHECK(m.precision() == Ratio { 1, 1 });
        CHECK(m.recall() == Ratio { 1, 1 });
        CHECK(m.accuracy() == Ratio { 1, 1 });
        CorpusMetrics none {};
        CHECK(!none.precision().defined());
        CHECK(none.precision().str() == "n/a");
        CorpusMetrics some { 2, 2, 3, 1, 0 };
        CHECK(some.precision() == Ratio { 1, 2 });
        CHECK(some.recall() == Ratio { 2, 3 });
        CHECK(some.accuracy() == Ratio { 5, 8 });
        CHECK(*some.accuracy().value() == 0.625);
    }

    TEST_CASE("randomized metrics match a cross-multiplication check")
    {
        std::mt19937_64 rng(29);
        for (int i = 0; i < 500; ++i) {
            CorpusMetrics m { rng() % 1000, rng() % 1000, rng() % 1000, rng() % 1000, 0 };
            if (i % 7 == 0)
                m.tp = m.fp = 0;
            auto same = [](Ratio r, uint64_t num, uint64_t den) {
                if (den == 0)
                    return !r.defined();
                return r.defined() && r.num * den == num * r.den && std::gcd(r.num, r.den) == 1;
            };
            CHECK(same(m.precision(), m.tp, m.tp + m.fp));
            CHECK(same(m.recall(), m.tp, m.tp + m.fn));
            CHECK(same(m.accuracy(), m.tp + m.tn, m.tp + m.tn + m.fp + m.fn));
        }
    }

    TEST_CASE("labels file and missing labels")
    {
        auto dir = scratch("labels");
        std::ofstream(dir / "a.pdf", std::ios::binary) << forge_document("app.alert(1)", variant_specs()[0]);
        std::ofstream(dir / "b.pdf", std::ios::binary) << forge_document("featureB.sendMessage()", variant_specs()[1]);
        std::ofstream(dir / "c.pdf", std::ios::binary) << "garbage";
        std::ofstream(dir / "extra.pdf", std::ios::binary) << forge_document("", variant_specs()[0]);
        std::ofstream(dir / "labels.txt") << "# comment\na.pdf benign\nb.pdf malicious  # trailing\n"
                                             "c.pdf benign\ngone.pdf malicious\n";
        auto result = scan_corpus(dir, dir / "labels.txt", {}, 2);
        CHECK(result.entries.size() == 3);
        CHECK(result.metrics == CorpusMetrics { 1, 1, 1, 0, 1 });
        CHECK(result.warnings.size() == 2);
        auto json = nlohmann::json::parse(corpus_json(result));
        CHECK(json["metrics"]["precision"]["exact"] == "1/2");
        CHECK(json["metrics"]["recall"]["exact"] == "1/1");
        CHECK(json["documents"].size() == 3);
        CHECK(corpus_table(result).find("precision 0.5000 (1/2)") != std::string::npos);

        std::ofstream(dir / "bad.txt") << "a.pdf maybe\n";
        CHECK_THROWS(load_labels(dir / "bad.txt"));
    }

    TEST_CASE("shipped corpus is current and fully separated")
    {
        auto files = test::build_corpus();
        size_t benign = 0, malicious = 0;
        for (auto const& f : files) {
            CAPTURE(f.name);
            CHECK(read_file(test::corpus_dir() / f.name) == f.bytes);
            (f.malicious ? malicious : benign)++;
        }
        CHECK(benign >= 40);
        CHECK(malicious >= 40);
        CHECK(read_file(test::corpus_dir() / "labels.txt") == test::corpus_labels(files));
        auto result = scan_corpus(test::corpus_dir(), test::corpus_dir() / "labels.txt");
        CHECK(result.warnings.empty());
        CHECK(result.entries.size() == files.size());
        CHECK(result.metrics.precision() == Ratio { 1, 1 });
        CHECK(result.metrics.recall() == Ratio { 1, 1 });
    }
}

TEST_SUITE("extraction battery")
{
    TEST_CASE("every construct over every base document")
    {
        auto bases = test::battery::bases();
        REQUIRE(bases.size() == 20);
        auto const& rows = test::battery::rows();
        REQUIRE(rows.size() == 16);
        for (size_t r = 0; r < rows.size(); ++r) {
            for (size_t b = 0; b < bases.size(); ++b) {
                CAPTURE(rows[r].construct);
                CAPTURE(b);
                auto bytes = rows[r].make(bases[b], static_cast<uint32_t>(r * 100 + b));
                auto result = test::battery::check(rows[r], bases[b], bytes);
                CHECK_MESSAGE(result.ok, result.problem);
            }
        }
    }
}
