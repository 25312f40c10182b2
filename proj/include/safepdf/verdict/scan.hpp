// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/verdict/verdict.hpp"

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace safepdf::verdict {

struct Config {
    Thresholds thresholds;
    // Null means the built-in registry.
    std::shared_ptr<model::Registry const> registry;
    size_t k = domain::default_k;
    size_t max_objects = 200000;
    size_t max_properties = 100000;
    // Literal source fragments removed from every script before parsing.
    // Empty by default.
    std::vector<std::string> allowlist;
    std::string password;

    model::Registry const& registry_or_default() const;
    std::string fingerprint() const;
};

// One source fragment per line; blank lines and lines starting with # are skipped.
std::vector<std::string> load_allowlist(std::filesystem::path const& path);

struct ScriptInfo {
    std::string name;
    std::string entry_kind;
    std::string event;
    std::optional<uint32_t> object_number;
    std::string path;
    std::string encoding;
    size_t length = 0;
    bool handler = false;
};

struct StageTiming {
    std::string stage;
    double seconds = 0;
};

enum class ReportStatus : uint8_t { Analyzed, IoError };

struct Report {
    static constexpr int version = 1;

    ReportStatus status = ReportStatus::Analyzed;
    std::string file;
    // IoError: what could not be read.
    std::string io_error;
    Verdict verdict;
    std::vector<ScriptInfo> scripts;
    std::vector<pdf::RecoveryNote> recovery_notes;
    std::vector<std::string> other_actions;
    std::vector<std::string> notes;
    std::vector<StageTiming> timings;
    double total_seconds = 0;
    Config config;
    size_t rounds = 0;

    bool malicious() const { return status == ReportStatus::Analyzed && verdict.label == Label::Malicious; }
};

Report scan(std::filesystem::path const& path, Config const& config = {});
Report scan_bytes(std::string_view bytes, Config const& config = {}, std::string file = {});

// Stable JSON document; `with_timings=false` drops every wall-clock field.
std::string report_json(Report const& report, bool with_timings = true, int indent = 2);
std::string report_text(Report const& report);

}
