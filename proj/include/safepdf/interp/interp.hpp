// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/heap.hpp"
#include "safepdf/interp/behavior.hpp"
#include "safepdf/js/ast.hpp"
#include "safepdf/model/environment.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace safepdf::interp {

using domain::AbstractHeap;
using domain::AbsValue;
using domain::Address;

struct Script {
    std::shared_ptr<js::Program const> program;
    // Shown in reports, e.g. the entry kind and event name.
    std::string name;
};

struct Budget {
    double timeout_seconds = 30;
    // Heap objects; exceeding it ends the analysis with MemoryBudget.
    size_t max_objects = 200000;
    // Total properties; exceeding it ends the analysis with PrecisionAbort.
    size_t max_properties = 100000;
};

enum class NotReached : uint8_t { Timeout, MemoryBudget, PrecisionAbort };
std::string_view not_reached_name(NotReached reason);

// Handed to Options::probe before each statement runs.
struct Probe {
    js::Node const& statement;
    uint32_t script;
    // Value of a variable in the statement's scope (bottom if undeclared).
    std::function<AbsValue(std::u16string_view)> lookup;
};

struct Options {
    size_t k = domain::default_k;
    // Longest concrete string kept by concatenation.
    uint64_t string_cap = 65536;
    // LargeString / LargeObject are logged above these sizes; the verdict
    // applies its own thresholds to the recorded size.
    uint64_t large_string_floor = 1024;
    uint64_t large_object_floor = 1024;
    size_t max_call_depth = 64;
    // Loop iterations run one by one while the loop test has a single outcome.
    size_t max_unroll = 512;
    // Also treat unreferenced top-level functions as event handlers.
    bool function_handlers = true;
    std::function<void(Probe const&)> probe;
};

struct State {
    bool live = false;
    AbstractHeap heap;

    bool leq(State const& other) const;
    State join(State const& other, size_t k) const;
    State widen(State const& next, size_t k) const;
    bool operator==(State const& other) const;
};

struct Outcome {
    std::optional<NotReached> not_reached;
    BehaviorLog log;
    State final_state;
    // Handler rounds until the joint fixpoint.
    size_t rounds = 0;
    Address global;

    bool fixpoint() const { return !not_reached; }
    // A global variable in the final state (bottom when absent).
    AbsValue global_value(std::u16string_view name) const;
};

// Runs the preamble scripts in order, then drives the handlers to a joint
// fixpoint. Scripts are expected to use disjoint allocation sites.
Outcome analyze(std::vector<Script> const& preamble, std::vector<Script> const& handlers,
                model::ModelEnvironment const& env, Budget const& budget = {}, Options const& options = {});

// Parses sources with consecutive site ranges. `failed` is the index of the
// first source with a fatal diagnostic; later sources are not parsed.
struct ParsedScripts {
    std::vector<Script> scripts;
    std::vector<js::ParseDiagnostic> diagnostics;
    std::optional<size_t> failed;
};
ParsedScripts parse_scripts(std::vector<std::pair<std::string, std::string>> const& named_sources,
                            uint32_t first_site = 1);

}
