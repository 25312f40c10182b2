// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/interp/interp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace safepdf::verdict {

enum class Label : uint8_t { Benign, Malicious };

// Declared from the earliest pipeline stage to the latest; when several
// apply, the earliest stage is reported.
enum class Cause : uint8_t {
    ExtractionError,
    JsParsingError,
    FixpointNotReached,
    MaliciousBehavior,
    UnexpectedBehavior,
    Clean,
};

std::string_view label_name(Label label);
std::string_view cause_name(Cause cause);

struct Thresholds {
    uint64_t max_string_length = 65536;
    uint64_t max_object_size = 65536;
    double analysis_timeout_s = 30;
};

struct Evidence {
    Cause cause = Cause::Clean;
    // Event kind ("ApiCall", "LargeString", ...) or the failing stage.
    std::string kind;
    std::string detail;
    // Index into the analyzed scripts, if the evidence points at code.
    std::optional<uint32_t> script;
    std::optional<js::Span> span;
    uint64_t size = 0;
    std::vector<std::string> args;
};

struct Verdict {
    Label label = Label::Benign;
    Cause cause = Cause::Clean;
    // Every cause that applied, in priority order.
    std::vector<Cause> causes;
    std::vector<Evidence> evidence;
};

// A stage that failed before the analysis could run.
struct PipelineFailure {
    Cause cause = Cause::ExtractionError; // ExtractionError or JsParsingError
    std::string message;
    std::optional<uint32_t> script;
    std::optional<js::Span> span;
};

// Builds the verdict from all evidence. The label is Malicious exactly when
// the evidence list is non-empty.
Verdict make_verdict(std::vector<Evidence> evidence);

Verdict classify(interp::Outcome const& outcome, Thresholds const& thresholds,
                 domain::AddressNamer const* namer = nullptr);
Verdict classify(PipelineFailure const& failure);

// Evidence contributed by an outcome's log and budget status.
std::vector<Evidence> outcome_evidence(interp::Outcome const& outcome, Thresholds const& thresholds,
                                       domain::AddressNamer const* namer = nullptr);

}
