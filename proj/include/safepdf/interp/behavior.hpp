// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/values.hpp"
#include "safepdf/js/ast.hpp"
#include "safepdf/model/registry.hpp"

#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace safepdf::interp {

enum class EventKind : uint8_t { ApiCall, EvalLike, UnknownCallee, LargeString, LargeObject, UnexpectedBehavior };

enum class UnexpectedKind : uint8_t {
    CallOfNonFunction,
    UnknownApi,
    PropertyOfUndefined,
    UndeclaredVariable,
    TypeError,
    UncaughtException,
    With,
    Accessor,
    Recursion,
};

std::string_view event_kind_name(EventKind kind);
std::string_view unexpected_kind_name(UnexpectedKind kind);

struct BehaviorEvent {
    EventKind kind = EventKind::ApiCall;
    // API path for ApiCall/EvalLike, the kind name for UnexpectedBehavior.
    std::string detail;
    model::Safety safety = model::Safety::Whitelisted;
    // ApiCall: argument summaries, joined over every call at this site.
    // EvalLike: the code argument.
    std::vector<domain::AbsValue> args;
    // LargeString/LargeObject: the largest size seen (unbounded_length if none).
    uint64_t size = 0;
    uint32_t script = 0;
    js::Span span;
};

// Events keyed by (kind, detail, script, span); repeated events merge.
class BehaviorLog {
public:
    void add(BehaviorEvent event, size_t k = domain::default_k);
    void merge(BehaviorLog const& other, size_t k = domain::default_k);

    std::vector<BehaviorEvent> events() const;
    size_t size() const { return m_events.size(); }
    bool empty() const { return m_events.empty(); }
    size_t count(EventKind kind, std::string_view detail = {}) const;

    bool operator==(BehaviorLog const& other) const;

private:
    using Key = std::tuple<uint8_t, std::string, uint32_t, uint32_t, uint32_t>;
    std::map<Key, BehaviorEvent> m_events;
};

}
