// SPDX-License-Identifier: Apache-2.0
#include "safepdf/verdict/verdict.hpp"

#include <algorithm>
#include <set>

namespace safepdf::verdict {

std::string_view label_name(Label label) { return label == Label::Benign ? "benign" : "malicious"; }

std::string_view cause_name(Cause cause)
{
    switch (cause) {
    case Cause::ExtractionError: return "ExtractionError";
    case Cause::JsParsingError: return "JsParsingError";
    case Cause::FixpointNotReached: return "FixpointNotReached";
    case Cause::MaliciousBehavior: return "MaliciousBehavior";
    case Cause::UnexpectedBehavior: return "UnexpectedBehavior";
    case Cause::Clean: return "Clean";
    }
    return "Clean";
}

Verdict make_verdict(std::vector<Evidence> evidence)
{
    Verdict v;
    std::set<Cause> causes;
    for (auto const& e : evidence)
        causes.insert(e.cause);
    v.causes.assign(causes.begin(), causes.end());
    std::stable_sort(evidence.begin(), evidence.end(),
                     [](Evidence const& a, Evidence const& b) { return a.cause < b.cause; });
    v.evidence = std::move(evidence);
    if (!v.evidence.empty()) {
        v.label = Label::Malicious;
        v.cause = v.causes.front();
    }
    return v;
}

std::vector<Evidence> outcome_evidence(interp::Outcome const& outcome, Thresholds const& thresholds,
                                       domain::AddressNamer const* namer)
{
    using interp::EventKind;
    std::vector<Evidence> out;
    if (outcome.not_reached) {
        Evidence e;
        e.cause = Cause::FixpointNotReached;
        e.kind = "FixpointNotReached";
        e.detail = std::string(interp::not_reached_name(*outcome.not_reached));
        out.push_back(std::move(e));
    }
    for (auto const& event : outcome.log.events()) {
        Evidence e;
        e.kind = std::string(interp::event_kind_name(event.kind));
        e.detail = event.detail;
        e.script = event.script;
        e.span = event.span;
        e.size = event.size;
        for (auto const& arg : event.args)
            e.args.push_back(domain::render(arg, namer));
        switch (event.kind) {
        case EventKind::ApiCall:
            if (event.safety != model::Safety::Vulnerable)
                continue;
            e.cause = Cause::MaliciousBehavior;
            break;
        case EventKind::EvalLike:
        case EventKind::UnknownCallee: e.cause = Cause::MaliciousBehavior; break;
        case EventKind::LargeString:
            if (event.size <= thresholds.max_string_length)
                continue;
            e.cause = Cause::MaliciousBehavior;
            break;
        case EventKind::LargeObject:
            if (event.size <= thresholds.max_object_size)
                continue;
            e.cause = Cause::MaliciousBehavior;
            break;
        case EventKind::UnexpectedBehavior: e.cause = Cause::UnexpectedBehavior; break;
        }
        out.push_back(std::move(e));
    }
    return out;
}

Verdict classify(interp::Outcome const& outcome, Thresholds const& thresholds, domain::AddressNamer const* namer)
{
    return make_verdict(outcome_evidence(outcome, thresholds, namer));
}

Verdict classify(PipelineFailure const& failure)
{
    Evidence e;
    e.cause = failure.cause;
    e.kind = std::string(cause_name(failure.cause));
    e.detail = failure.message;
    e.script = failure.script;
    e.span = failure.span;
    return make_verdict({ std::move(e) });
}

}
