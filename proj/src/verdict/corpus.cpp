// SPDX-License-Identifier: Apache-2.0
#include "safepdf/verdict/corpus.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

namespace safepdf::verdict {

Ratio Ratio::of(uint64_t num, uint64_t den)
{
    if (den == 0)
        return {};
    uint64_t g = std::gcd(num, den);
    return { num / g, den / g };
}

std::optional<double> Ratio::value() const
{
    if (!defined())
        return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

std::string Ratio::str() const
{
    if (!defined())
        return "n/a";
    return std::to_string(num) + "/" + std::to_string(den);
}

CorpusMetrics& CorpusMetrics::operator+=(CorpusMetrics const& other)
{
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    errors += other.errors;
    return *this;
}

CorpusMetrics tally(Label truth, Report const& report)
{
    CorpusMetrics m;
    bool failed = report.status == ReportStatus::IoError || report.verdict.cause == Cause::ExtractionError
        || report.verdict.cause == Cause::JsParsingError;
    // A failed pipeline is a positive report, whatever stage failed.
    bool positive = failed || report.verdict.label == Label::Malicious;
    if (truth == Label::Malicious)
        (positive ? m.tp : m.fn) = 1;
    else
        (positive ? m.fp : m.tn) = 1;
    m.errors = failed ? 1 : 0;
    return m;
}

std::map<std::string, Label> load_labels(std::filesystem::path const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read labels file " + path.string());
    std::map<std::string, Label> labels;
    std::string line;
    size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string name, label, extra;
        if (!(fields >> name))
            continue;
        if (!(fields >> label) || (fields >> extra))
            throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": expected `name label`");
        if (label == "benign")
            labels[name] = Label::Benign;
        else if (label == "malicious")
            labels[name] = Label::Malicious;
        else
            throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": unknown label " + label);
    }
    return labels;
}

CorpusResult scan_corpus(std::filesystem::path const& dir, std::map<std::string, Label> const& labels,
                         Config const& config, size_t workers)
{
    namespace fs = std::filesystem;
    CorpusResult result;
    std::vector<std::string> names;
    for (auto const& item : fs::directory_iterator(dir)) {
        std::error_code ec;
        if (!fs::is_regular_file(item.path(), ec))
            continue;
        names.push_back(item.path().filename().string());
    }
    std::sort(names.begin(), names.end());
    for (auto const& name : names) {
        auto it = labels.find(name);
        if (it == labels.end()) {
            result.warnings.push_back("no label for " + name + ", skipped");
            continue;
        }
        result.entries.push_back({ name, it->second, {} });
    }
    for (auto const& [name, label] : labels) {
        if (!std::binary_search(names.begin(), names.end(), name))
            result.warnings.push_back("labeled file " + name + " not found");
    }

    if (workers == 0)
        workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<size_t>(1, result.entries.size()));
    std::atomic<size_t> next { 0 };
    auto work = [&] {
        for (size_t i = next++; i < result.entries.size(); i = next++)
            result.entries[i].report = scan(dir / result.entries[i].name, config);
    };
    std::vector<std::thread> pool;
    for (size_t w = 1; w < workers; ++w)
        pool.emplace_back(work);
    work();
    for (auto& t : pool)
        t.join();

    for (auto const& entry : result.entries)
        result.metrics += tally(entry.truth, entry.report);
    return result;
}

CorpusResult scan_corpus(std::filesystem::path const& dir, std::filesystem::path const& labels_file,
                         Config const& config, size_t workers)
{
    auto result = scan_corpus(dir, load_labels(labels_file), config, workers);
    // The labels file may live next to the documents.
    std::error_code ec;
    if (std::filesystem::equivalent(dir / labels_file.filename(), labels_file, ec)) {
        std::string unlabeled = "no label for " + labels_file.filename().string() + ", skipped";
        std::erase(result.warnings, unlabeled);
    }
    return result;
}

namespace {

nlohmann::ordered_json ratio_json(Ratio r)
{
    if (!r.defined())
        return { { "value", nullptr }, { "exact", "n/a" } };
    return { { "value", *r.value() }, { "num", r.num }, { "den", r.den }, { "exact", r.str() } };
}

}

std::string corpus_json(CorpusResult const& result, int indent)
{
    using nlohmann::ordered_json;
    auto const& m = result.metrics;
    ordered_json out;
    out["report_version"] = Report::version;
    out["metrics"] = { { "tp", m.tp },
                       { "fp", m.fp },
                       { "tn", m.tn },
                       { "fn", m.fn },
                       { "errors", m.errors },
                       { "precision", ratio_json(m.precision()) },
                       { "recall", ratio_json(m.recall()) },
                       { "accuracy", ratio_json(m.accuracy()) } };
    ordered_json docs = ordered_json::array();
    for (auto const& e : result.entries) {
        ordered_json doc;
        doc["file"] = e.name;
        doc["label"] = label_name(e.truth);
        doc["report"] = ordered_json::parse(report_json(e.report, true, -1));
        docs.push_back(doc);
    }
    out["documents"] = docs;
    out["warnings"] = result.warnings;
    return out.dump(indent);
}

std::string corpus_table(CorpusResult const& result)
{
    std::ostringstream out;
    size_t width = 8;
    for (auto const& e : result.entries)
        width = std::max(width, e.name.size());
    auto pad = [&](std::string s) {
        s.resize(std::max(s.size(), width + 2), ' ');
        return s;
    };
    out << pad("file") << "label      verdict    cause\n";
    for (auto const& e : result.entries) {
        std::string truth(label_name(e.truth));
        std::string verdict = e.report.status == ReportStatus::IoError ? "error" : std::string(label_name(e.report.verdict.label));
        truth.resize(11, ' ');
        verdict.resize(11, ' ');
        out << pad(e.name) << truth << verdict
            << (e.report.status == ReportStatus::IoError ? "IoError" : cause_name(e.report.verdict.cause)) << "\n";
    }
    auto const& m = result.metrics;
    auto fmt = [](Ratio r) {
        if (!r.defined())
            return std::string("n/a");
        char buf[32];
        snprintf(buf, sizeof buf, "%.4f", *r.value());
        return std::string(buf) + " (" + r.str() + ")";
    };
    out << "\nTP " << m.tp << "  FP " << m.fp << "  TN " << m.tn << "  FN " << m.fn << "  errors " << m.errors << "\n";
    out << "precision " << fmt(m.precision()) << "\n";
    out << "recall    " << fmt(m.recall()) << "\n";
    out << "accuracy  " << fmt(m.accuracy()) << "\n";
    for (auto const& w : result.warnings)
        out << "warning: " << w << "\n";
    return out.str();
}

}
