// SPDX-License-Identifier: Apache-2.0
#include "safepdf/verdict/scan.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

namespace safepdf::verdict {

namespace {

using nlohmann::ordered_json;

ordered_json span_json(js::Span const& span)
{
    return { { "line", span.line },   { "column", span.column },         { "start", span.start },
             { "end", span.end },     { "byte_start", span.byte_start }, { "byte_end", span.byte_end } };
}

ordered_json evidence_json(Evidence const& e, Report const& report)
{
    ordered_json out;
    out["cause"] = cause_name(e.cause);
    out["kind"] = e.kind;
    out["detail"] = e.detail;
    if (e.script) {
        out["script"] = *e.script;
        if (*e.script < report.scripts.size()) {
            auto const& info = report.scripts[*e.script];
            ordered_json origin;
            origin["name"] = info.name;
            origin["path"] = info.path;
            origin["object"] = info.object_number ? ordered_json(*info.object_number) : ordered_json(nullptr);
            out["origin"] = origin;
        }
    }
    if (e.span)
        out["span"] = span_json(*e.span);
    if (e.size == domain::unbounded_length)
        out["size"] = "unbounded";
    else if (e.size)
        out["size"] = e.size;
    if (!e.args.empty())
        out["args"] = e.args;
    return out;
}

}

std::string report_json(Report const& report, bool with_timings, int indent)
{
    ordered_json out;
    out["report_version"] = Report::version;
    out["file"] = report.file;
    if (report.status == ReportStatus::IoError) {
        out["status"] = "io_error";
        out["error"] = report.io_error;
        return out.dump(indent);
    }
    out["status"] = "analyzed";
    out["verdict"] = label_name(report.verdict.label);
    out["cause"] = cause_name(report.verdict.cause);
    ordered_json causes = ordered_json::array();
    for (auto c : report.verdict.causes)
        causes.push_back(cause_name(c));
    out["causes"] = causes;
    ordered_json evidence = ordered_json::array();
    for (auto const& e : report.verdict.evidence)
        evidence.push_back(evidence_json(e, report));
    out["evidence"] = evidence;

    ordered_json scripts = ordered_json::array();
    for (auto const& s : report.scripts) {
        scripts.push_back({ { "name", s.name },
                            { "entry_kind", s.entry_kind },
                            { "event", s.event },
                            { "object", s.object_number ? ordered_json(*s.object_number) : ordered_json(nullptr) },
                            { "path", s.path },
                            { "encoding", s.encoding },
                            { "length", s.length },
                            { "handler", s.handler } });
    }
    out["scripts"] = scripts;
    ordered_json notes = ordered_json::array();
    for (auto const& n : report.recovery_notes)
        notes.push_back({ { "kind", pdf::recovery_kind_name(n.kind) }, { "offset", n.offset }, { "detail", n.detail } });
    out["recovery_notes"] = notes;
    out["other_actions"] = report.other_actions;
    out["notes"] = report.notes;
    out["handler_rounds"] = report.rounds;

    auto const& cfg = report.config;
    out["config"] = { { "fingerprint", cfg.fingerprint() },
                      { "registry", cfg.registry_or_default().fingerprint() },
                      { "max_string_length", cfg.thresholds.max_string_length },
                      { "max_object_size", cfg.thresholds.max_object_size },
                      { "analysis_timeout_s", cfg.thresholds.analysis_timeout_s },
                      { "k", cfg.k },
                      { "allowlist_entries", cfg.allowlist.size() } };
    if (with_timings) {
        ordered_json timings = ordered_json::object();
        for (auto const& t : report.timings)
            timings[t.stage] = t.seconds;
        out["timings"] = timings;
        out["total_seconds"] = report.total_seconds;
    }
    return out.dump(indent);
}

std::string report_text(Report const& report)
{
    std::ostringstream out;
    out << report.file << ": ";
    if (report.status == ReportStatus::IoError) {
        out << "error: " << report.io_error << "\n";
        return out.str();
    }
    out << label_name(report.verdict.label) << " (" << cause_name(report.verdict.cause) << ")\n";
    for (auto const& e : report.verdict.evidence) {
        out << "  " << cause_name(e.cause) << " " << e.kind;
        if (!e.detail.empty())
            out << " " << e.detail;
        if (e.size == domain::unbounded_length)
            out << " size=unbounded";
        else if (e.size)
            out << " size=" << e.size;
        if (e.script && *e.script < report.scripts.size()) {
            out << " in " << report.scripts[*e.script].name;
            if (e.span)
                out << " at " << e.span->line << ":" << e.span->column;
        }
        for (auto const& arg : e.args)
            out << " [" << arg << "]";
        out << "\n";
    }
    out << "  scripts: " << report.scripts.size();
    if (!report.recovery_notes.empty())
        out << ", recovery notes: " << report.recovery_notes.size();
    out << "\n";
    char buf[64];
    out << "  timings:";
    for (auto const& t : report.timings) {
        snprintf(buf, sizeof buf, " %s=%.3fs", t.stage.c_str(), t.seconds);
        out << buf;
    }
    snprintf(buf, sizeof buf, " total=%.3fs\n", report.total_seconds);
    out << buf;
    return out.str();
}

}
