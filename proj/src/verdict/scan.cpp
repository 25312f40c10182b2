// SPDX-License-Identifier: Apache-2.0
#include "safepdf/verdict/scan.hpp"

#include "safepdf/extract/extract.hpp"
#include "safepdf/interp/interp.hpp"
#include "safepdf/model/environment.hpp"
#include "safepdf/pdf/document.hpp"

#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

namespace safepdf::verdict {

model::Registry const& Config::registry_or_default() const
{
    return registry ? *registry : model::default_registry();
}

std::string Config::fingerprint() const
{
    std::ostringstream out;
    out << "registry=" << registry_or_default().fingerprint() << ";max_string=" << thresholds.max_string_length
        << ";max_object=" << thresholds.max_object_size << ";timeout=" << thresholds.analysis_timeout_s
        << ";k=" << k << ";allowlist=" << allowlist.size();
    return out.str();
}

std::vector<std::string> load_allowlist(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read allowlist " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        out.push_back(line);
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
public:
    explicit Stopwatch(Report& report) : m_report(report), m_start(Clock::now()), m_lap(m_start) { }

    void lap(std::string stage)
    {
        auto now = Clock::now();
        m_report.timings.push_back({ std::move(stage), std::chrono::duration<double>(now - m_lap).count() });
        m_lap = now;
        m_report.total_seconds = std::chrono::duration<double>(now - m_start).count();
    }

private:
    Report& m_report;
    Clock::time_point m_start;
    Clock::time_point m_lap;
};

std::string text_of(pdf::Document const& doc, pdf::Object const& value)
{
    pdf::Object v = doc.resolve(value);
    if (v.kind() == pdf::ObjectKind::LiteralString)
        return extract::decode_text_string(v.raw_string(), extract::Container::LiteralString).text;
    if (v.kind() == pdf::ObjectKind::HexString)
        return extract::decode_text_string(v.raw_string(), extract::Container::HexString).text;
    return {};
}

void collect_fields(pdf::Document const& doc, pdf::Object const& node, std::string const& prefix,
                    std::set<uint32_t>& seen, std::vector<std::string>& out, int depth)
{
    if (depth > 32)
        return;
    if (node.is_reference() && !seen.insert(node.as_reference().number).second)
        return;
    pdf::Object v = doc.resolve(node);
    if (v.is_array()) {
        for (auto const& item : v.as_array())
            collect_fields(doc, item, prefix, seen, out, depth + 1);
        return;
    }
    if (!v.is_dictionary())
        return;
    std::string name = prefix;
    std::string partial = text_of(doc, v.dict().get("T"));
    if (!partial.empty())
        name = prefix.empty() ? partial : prefix + "." + partial;
    if (!partial.empty())
        out.push_back(name);
    if (auto const* kids = v.dict().find("Kids"))
        collect_fields(doc, *kids, name, seen, out, depth + 1);
}

model::DocMeta document_meta(pdf::Document const& doc)
{
    model::DocMeta meta;
    pdf::Object acroform = doc.resolve(doc.catalog().get("AcroForm"));
    if (!acroform.is_dictionary())
        return meta;
    std::set<uint32_t> seen;
    collect_fields(doc, acroform.dict().get("Fields"), "", seen, meta.field_names, 0);
    std::sort(meta.field_names.begin(), meta.field_names.end());
    meta.field_names.erase(std::unique(meta.field_names.begin(), meta.field_names.end()), meta.field_names.end());
    return meta;
}

std::string script_name(extract::ExtractedScript const& s)
{
    std::string name(extract::entry_kind_name(s.entry_kind));
    if (!s.event.empty())
        name += ":" + s.event;
    return name;
}

void strip_fragments(std::string& source, std::vector<std::string> const& fragments, size_t& removed)
{
    for (auto const& fragment : fragments) {
        if (fragment.empty())
            continue;
        for (size_t at = source.find(fragment); at != std::string::npos; at = source.find(fragment, at)) {
            source.erase(at, fragment.size());
            ++removed;
        }
    }
}

Evidence failure_evidence(Cause cause, std::string kind, std::string detail)
{
    Evidence e;
    e.cause = cause;
    e.kind = std::move(kind);
    e.detail = std::move(detail);
    return e;
}

}

Report scan_bytes(std::string_view bytes, Config const& config, std::string file)
{
    Report report;
    report.file = std::move(file);
    report.config = config;
    Stopwatch clock(report);

    std::optional<pdf::Document> doc;
    try {
        pdf::ParseOptions options;
        options.password = config.password;
        doc = pdf::parse_document(bytes, options);
    } catch (std::exception const& e) {
        clock.lap("parse_pdf");
        report.verdict = classify(PipelineFailure { Cause::ExtractionError, e.what(), {}, {} });
        return report;
    }
    clock.lap("parse_pdf");
    report.recovery_notes = doc->recovery_notes();

    extract::AnalysisUnit unit;
    model::DocMeta meta;
    try {
        unit = extract::extract_scripts(*doc);
        meta = document_meta(*doc);
    } catch (std::exception const& e) {
        clock.lap("extract");
        report.verdict = classify(PipelineFailure { Cause::ExtractionError, e.what(), {}, {} });
        return report;
    }
    clock.lap("extract");
    for (auto& note : unit.notes)
        report.recovery_notes.push_back(std::move(note));
    report.other_actions = unit.other_actions;

    std::vector<std::pair<std::string, std::string>> sources;
    size_t removed = 0;
    auto add_script = [&](extract::ExtractedScript const& s, bool handler) {
        ScriptInfo info;
        info.name = script_name(s);
        info.entry_kind = std::string(extract::entry_kind_name(s.entry_kind));
        info.event = s.event;
        info.object_number = s.origin.object_number;
        info.path = s.origin.path;
        info.encoding = std::string(extract::encoding_name(s.encoding_used));
        info.length = s.source_text.size();
        info.handler = handler;
        report.scripts.push_back(info);
        std::string source = s.source_text;
        strip_fragments(source, config.allowlist, removed);
        sources.emplace_back(info.name, std::move(source));
    };
    for (auto const& s : unit.preamble)
        add_script(s, false);
    for (auto const& s : unit.handlers)
        add_script(s, true);
    if (removed)
        report.notes.push_back("allowlist removed " + std::to_string(removed) + " fragment(s)");

    auto parsed = interp::parse_scripts(sources);
    clock.lap("parse_js");
    if (parsed.failed) {
        PipelineFailure failure { Cause::JsParsingError, "parse error", static_cast<uint32_t>(*parsed.failed), {} };
        for (auto const& d : parsed.diagnostics) {
            if (d.severity == js::Severity::Fatal) {
                failure.message = d.message;
                failure.span = d.span;
            }
        }
        report.verdict = classify(failure);
        return report;
    }

    std::optional<model::ModelEnvironment> env;
    try {
        env = model::build_environment(&meta, config.registry_or_default(), config.k);
        if (unit.xfa_tree)
            model::model_xfa(*env, *unit.xfa_tree);
    } catch (std::exception const& e) {
        // A registry that does not fit the model is a configuration problem,
        // but the document still cannot be shown to be safe.
        clock.lap("model");
        report.verdict = make_verdict({ failure_evidence(Cause::ExtractionError, "ModelError", e.what()) });
        return report;
    }
    clock.lap("model");

    std::vector<interp::Script> preamble(parsed.scripts.begin(), parsed.scripts.begin() + unit.preamble.size());
    std::vector<interp::Script> handlers(parsed.scripts.begin() + unit.preamble.size(), parsed.scripts.end());
    interp::Budget budget;
    budget.timeout_seconds = config.thresholds.analysis_timeout_s;
    budget.max_objects = config.max_objects;
    budget.max_properties = config.max_properties;
    interp::Options options;
    options.k = config.k;
    options.large_string_floor = std::min<uint64_t>(options.large_string_floor, config.thresholds.max_string_length);
    options.large_object_floor = std::min<uint64_t>(options.large_object_floor, config.thresholds.max_object_size);
    options.string_cap = std::max<uint64_t>(options.string_cap, config.thresholds.max_string_length + 1);
    auto outcome = interp::analyze(preamble, handlers, *env, budget, options);
    clock.lap("analyze");
    report.rounds = outcome.rounds;

    auto namer = env->namer();
    auto evidence = outcome_evidence(outcome, config.thresholds, &namer);
    for (auto const& invalid : unit.invalid_scripts) {
        Evidence e = failure_evidence(Cause::UnexpectedBehavior, "InvalidScript",
                                      "/JS value of kind " + invalid.kind + " at " + invalid.origin.path);
        evidence.push_back(std::move(e));
    }
    report.verdict = make_verdict(std::move(evidence));
    clock.lap("classify");
    return report;
}

Report scan(std::filesystem::path const& path, Config const& config)
{
    std::error_code ec;
    std::ifstream in;
    if (std::filesystem::is_regular_file(path, ec))
        in.open(path, std::ios::binary);
    std::ostringstream buffer;
    if (in.is_open())
        buffer << in.rdbuf();
    if (!in.is_open() || in.bad()) {
        Report report;
        report.status = ReportStatus::IoError;
        report.file = path.string();
        report.io_error = "cannot read " + path.string();
        report.config = config;
        return report;
    }
    return scan_bytes(buffer.str(), config, path.string());
}

}
