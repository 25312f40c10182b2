// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/verdict/scan.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace safepdf::verdict {

// Exact fraction in lowest terms; den == 0 stands for an undefined value.
struct Ratio {
    uint64_t num = 0;
    uint64_t den = 0;

    static Ratio of(uint64_t num, uint64_t den);
    bool defined() const { return den != 0; }
    std::optional<double> value() const;
    // "n/a" when undefined, else e.g. "3/4".
    std::string str() const;
    bool operator==(Ratio const&) const = default;
};

struct CorpusMetrics {
    uint64_t tp = 0;
    uint64_t fp = 0;
    uint64_t tn = 0;
    uint64_t fn = 0;
    // Documents whose pipeline failed; these are also counted in tp or fp.
    uint64_t errors = 0;

    Ratio precision() const { return Ratio::of(tp, tp + fp); }
    Ratio recall() const { return Ratio::of(tp, tp + fn); }
    Ratio accuracy() const { return Ratio::of(tp + tn, tp + tn + fp + fn); }

    CorpusMetrics& operator+=(CorpusMetrics const& other);
    bool operator==(CorpusMetrics const&) const = default;
};

// Tallies one labeled document.
CorpusMetrics tally(Label truth, Report const& report);

// "name benign|malicious" per line; # starts a comment. Throws on malformed lines.
std::map<std::string, Label> load_labels(std::filesystem::path const& path);

struct CorpusEntry {
    std::string name;
    Label truth = Label::Benign;
    Report report;
};

struct CorpusResult {
    CorpusMetrics metrics;
    std::vector<CorpusEntry> entries; // sorted by name
    std::vector<std::string> warnings;
};

// Scans every regular file in `dir` (symlinks followed) that has a label.
// `workers == 0` uses one worker per hardware thread.
CorpusResult scan_corpus(std::filesystem::path const& dir, std::map<std::string, Label> const& labels,
                         Config const& config = {}, size_t workers = 0);
CorpusResult scan_corpus(std::filesystem::path const& dir, std::filesystem::path const& labels_file,
                         Config const& config = {}, size_t workers = 0);

std::string corpus_json(CorpusResult const& result, int indent = 2);
std::string corpus_table(CorpusResult const& result);

}
