// SPDX-License-Identifier: Apache-2.0
#include "safepdf/model/registry.hpp"
#include "safepdf/verdict/corpus.hpp"
#include "safepdf/verdict/forge.hpp"
#include "safepdf/verdict/scan.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace safepdf;

constexpr int exit_benign = 0;
constexpr int exit_malicious = 1;
constexpr int exit_error = 2;

struct CommonFlags {
    std::string registry;
    std::string allowlist;
    std::string password;
    double timeout = 30;
    uint64_t max_string = 65536;
    uint64_t max_object = 65536;
    size_t k = domain::default_k;

    void add(CLI::App* cmd)
    {
        cmd->add_option("--registry", registry, "API registry file (overrides SAFEPDF_REGISTRY)");
        cmd->add_option("--timeout", timeout, "Analysis budget in seconds")->check(CLI::PositiveNumber);
        cmd->add_option("--max-string", max_string, "Longest string considered benign")->check(CLI::PositiveNumber);
        cmd->add_option("--max-object", max_object, "Largest object considered benign")->check(CLI::PositiveNumber);
        cmd->add_option("--k", k, "Constant-set bound of the abstract domains")->check(CLI::PositiveNumber);
        cmd->add_option("--allowlist", allowlist, "File of source fragments removed before analysis");
        cmd->add_option("--password", password, "User password for encrypted documents");
    }

    verdict::Config config() const
    {
        verdict::Config cfg;
        cfg.thresholds.analysis_timeout_s = timeout;
        cfg.thresholds.max_string_length = max_string;
        cfg.thresholds.max_object_size = max_object;
        cfg.k = k;
        cfg.password = password;
        std::string path = registry;
        if (path.empty()) {
            if (char const* env = std::getenv("SAFEPDF_REGISTRY"))
                path = env;
        }
        if (!path.empty())
            cfg.registry = std::make_shared<model::Registry>(model::load_registry_file(path));
        if (!allowlist.empty())
            cfg.allowlist = verdict::load_allowlist(allowlist);
        return cfg;
    }
};

}

int main(int argc, char** argv)
{
    CLI::App app { "Static detection of malicious JavaScript in PDF documents" };
    app.require_subcommand(1);

    CommonFlags scan_flags;
    std::string scan_file;
    bool json = false;
    bool text = false;
    auto* scan_cmd = app.add_subcommand("scan", "Scan one document");
    scan_cmd->add_option("file", scan_file, "PDF document")->required();
    scan_flags.add(scan_cmd);
    auto* json_flag = scan_cmd->add_flag("--json", json, "JSON report (default)");
    scan_cmd->add_flag("--text", text, "Human-readable report")->excludes(json_flag);

    CommonFlags corpus_flags;
    std::string corpus_dir;
    std::string labels;
    size_t jobs = 0;
    bool corpus_json = false;
    auto* corpus_cmd = app.add_subcommand("scan-corpus", "Scan a labeled directory and report metrics");
    corpus_cmd->add_option("dir", corpus_dir, "Directory of documents")->required();
    corpus_cmd->add_option("--labels", labels, "Lines of `name benign|malicious`")->required();
    corpus_cmd->add_option("--jobs", jobs, "Worker threads (0 = one per core)");
    corpus_cmd->add_flag("--json", corpus_json, "Machine-readable summary with per-file reports");
    corpus_flags.add(corpus_cmd);

    std::string payload;
    std::string out_dir;
    auto* forge_cmd = app.add_subcommand("forge", "Write evasion variants of a payload script");
    forge_cmd->add_option("payload", payload, "JavaScript file")->required();
    forge_cmd->add_option("--out", out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (CLI::ParseError const& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : exit_error;
    }

    try {
        if (*scan_cmd) {
            auto report = verdict::scan(scan_file, scan_flags.config());
            std::cout << (text ? verdict::report_text(report) : verdict::report_json(report) + "\n");
            if (report.status == verdict::ReportStatus::IoError) {
                std::cerr << "error: " << report.io_error << "\n";
                return exit_error;
            }
            return report.malicious() ? exit_malicious : exit_benign;
        }
        if (*corpus_cmd) {
            auto result = verdict::scan_corpus(corpus_dir, labels, corpus_flags.config(), jobs);
            for (auto const& w : result.warnings)
                std::cerr << "warning: " << w << "\n";
            std::cout << (corpus_json ? verdict::corpus_json(result) + "\n" : verdict::corpus_table(result));
            return 0;
        }
        if (*forge_cmd) {
            std::ifstream in(payload, std::ios::binary);
            if (!in) {
                std::cerr << "error: cannot read " << payload << "\n";
                return exit_error;
            }
            std::ostringstream js;
            js << in.rdbuf();
            for (auto const& file : verdict::forge_variants(js.str(), out_dir))
                std::cout << file.path.string() << "\n";
            return 0;
        }
    } catch (std::exception const& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_error;
    }
    return exit_error;
}
