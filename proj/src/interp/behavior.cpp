// SPDX-License-Identifier: Apache-2.0
#include "safepdf/interp/behavior.hpp"

#include <algorithm>

namespace safepdf::interp {

std::string_view event_kind_name(EventKind kind)
{
    switch (kind) {
    case EventKind::ApiCall: return "ApiCall";
    case EventKind::EvalLike: return "EvalLike";
    case EventKind::UnknownCallee: return "UnknownCallee";
    case EventKind::LargeString: return "LargeString";
    case EventKind::LargeObject: return "LargeObject";
    case EventKind::UnexpectedBehavior: return "UnexpectedBehavior";
    }
    return "ApiCall";
}

std::string_view unexpected_kind_name(UnexpectedKind kind)
{
    switch (kind) {
    case UnexpectedKind::CallOfNonFunction: return "CallOfNonFunction";
    case UnexpectedKind::UnknownApi: return "UnknownApi";
    case UnexpectedKind::PropertyOfUndefined: return "PropertyOfUndefined";
    case UnexpectedKind::UndeclaredVariable: return "UndeclaredVariable";
    case UnexpectedKind::TypeError: return "TypeError";
    case UnexpectedKind::UncaughtException: return "UncaughtException";
    case UnexpectedKind::With: return "With";
    case UnexpectedKind::Accessor: return "Accessor";
    case UnexpectedKind::Recursion: return "Recursion";
    }
    return "TypeError";
}

void BehaviorLog::add(BehaviorEvent event, size_t k)
{
    Key key { static_cast<uint8_t>(event.kind), event.detail, event.script, event.span.start, event.span.end };
    auto it = m_events.find(key);
    if (it == m_events.end()) {
        m_events.emplace(std::move(key), std::move(event));
        return;
    }
    BehaviorEvent& old = it->second;
    old.size = std::max(old.size, event.size);
    if (old.args.size() < event.args.size())
        old.args.resize(event.args.size());
    for (size_t i = 0; i < event.args.size(); ++i)
        old.args[i] = old.args[i].join(event.args[i], k);
}

void BehaviorLog::merge(BehaviorLog const& other, size_t k)
{
    for (auto const& [key, event] : other.m_events)
        add(event, k);
}

std::vector<BehaviorEvent> BehaviorLog::events() const
{
    std::vector<BehaviorEvent> out;
    out.reserve(m_events.size());
    for (auto const& [key, event] : m_events)
        out.push_back(event);
    return out;
}

size_t BehaviorLog::count(EventKind kind, std::string_view detail) const
{
    return static_cast<size_t>(std::count_if(m_events.begin(), m_events.end(), [&](auto const& entry) {
        return entry.second.kind == kind && (detail.empty() || entry.second.detail == detail);
    }));
}

bool BehaviorLog::operator==(BehaviorLog const& other) const
{
    if (m_events.size() != other.m_events.size())
        return false;
    auto a = m_events.begin();
    auto b = other.m_events.begin();
    for (; a != m_events.end(); ++a, ++b) {
        if (a->first != b->first || a->second.size != b->second.size || a->second.args != b->second.args
            || a->second.safety != b->second.safety)
            return false;
    }
    return true;
}

}
