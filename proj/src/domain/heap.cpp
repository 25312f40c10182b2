// SPDX-License-Identifier: Apache-2.0
#include "safepdf/domain/heap.hpp"

#include <algorithm>
#include <cmath>

namespace safepdf::domain {

std::string_view class_name(ObjClass c)
{
    switch (c) {
    case ObjClass::Plain: return "Object";
    case ObjClass::Array: return "Array";
    case ObjClass::Function: return "Function";
    case ObjClass::Builtin: return "Builtin";
    case ObjClass::Regex: return "RegExp";
    case ObjClass::Error: return "Error";
    case ObjClass::Environment: return "Environment";
    case ObjClass::Field: return "Field";
    case ObjClass::Date: return "Date";
    case ObjClass::Arguments: return "Arguments";
    }
    return "Object";
}

std::optional<uint32_t> array_index(std::u16string_view s)
{
    if (s.empty() || s.size() > 10 || (s.size() > 1 && s[0] == u'0'))
        return std::nullopt;
    uint64_t v = 0;
    for (char16_t c : s) {
        if (c < u'0' || c > u'9')
            return std::nullopt;
        v = v * 10 + (c - u'0');
    }
    if (v >= 4294967295ull)
        return std::nullopt;
    return static_cast<uint32_t>(v);
}

AbsString to_property_key(AbsValue const& key, size_t k) { return to_string(key, k); }

namespace {

void add_match(Match& m, AbsValue const& v, size_t k) { m.value = m.value.join(v, k); }

void match_concrete(AbstractObject const& obj, std::u16string const& name, Match& m, size_t k)
{
    if (obj.cls == ObjClass::Array && name == u"length") {
        add_match(m, AbsValue::number(obj.internal_length), k);
        return;
    }
    auto it = obj.properties.find(name);
    if (it != obj.properties.end()) {
        add_match(m, it->second.value, k);
        if (it->second.definite)
            return;
    }
    add_match(m, obj.default_field, k);
    m.may_be_absent = true;
}

AbsNumber grown_length(AbsNumber const& length, uint32_t index, size_t k)
{
    double needed = static_cast<double>(index) + 1;
    switch (length.kind()) {
    case AbsNumber::Kind::Top: return length;
    case AbsNumber::Kind::Bottom: return AbsNumber::constant(needed);
    case AbsNumber::Kind::Set: {
        std::set<double, NumberLess> out;
        for (double l : length.values())
            out.insert(std::isnan(l) ? needed : std::max(l, needed));
        return AbsNumber::of(std::move(out), k);
    }
    }
    return length;
}

}

Match property_match(AbstractObject const& obj, AbsString const& key, size_t k)
{
    Match m;
    bool array = obj.cls == ObjClass::Array;
    switch (key.kind()) {
    case AbsString::Kind::Bottom: break;
    case AbsString::Kind::Set:
        for (auto const& name : key.values())
            match_concrete(obj, name, m, k);
        break;
    case AbsString::Kind::NumberStr:
    case AbsString::Kind::NotNumberStr:
    case AbsString::Kind::Top: {
        bool want_numbers = key.kind() != AbsString::Kind::NotNumberStr;
        bool want_others = key.kind() != AbsString::Kind::NumberStr;
        for (auto const& [name, prop] : obj.properties) {
            bool numeric = is_number_string(name);
            if ((numeric && want_numbers) || (!numeric && want_others))
                add_match(m, prop.value, k);
        }
        if (array && want_others)
            add_match(m, AbsValue::number(obj.internal_length), k);
        add_match(m, obj.default_field, k);
        m.may_be_absent = true;
        break;
    }
    }
    return m;
}

Match property_match(AbstractObject const& obj, AbsValue const& key, size_t k)
{
    return property_match(obj, to_property_key(key, k), k);
}

WriteResult write_property(AbstractObject& obj, AbsString const& key, AbsValue const& value, bool strong, size_t k)
{
    bool array = obj.cls == ObjClass::Array;
    auto write_length = [&](bool replace) {
        AbsNumber n = to_number(value, k);
        obj.internal_length = replace ? n : obj.internal_length.join(n, k);
        // items past a shorter length would be deleted
        for (auto& [name, prop] : obj.properties) {
            if (array_index(name))
                prop.definite = false;
        }
    };
    switch (key.kind()) {
    case AbsString::Kind::Bottom: break;
    case AbsString::Kind::Set: {
        bool is_strong = strong && !obj.summary && key.values().size() == 1;
        for (auto const& name : key.values()) {
            if (array && name == u"length") {
                write_length(is_strong);
                continue;
            }
            auto it = obj.properties.find(name);
            if (is_strong) {
                obj.properties[name] = Property { value, true };
            } else if (it != obj.properties.end()) {
                it->second.value = it->second.value.join(value, k);
            } else {
                obj.properties[name] = Property { value, false };
            }
            if (array) {
                if (auto index = array_index(name)) {
                    AbsNumber grown = grown_length(obj.internal_length, *index, k);
                    obj.internal_length = is_strong ? grown : obj.internal_length.join(grown, k);
                }
            }
        }
        break;
    }
    case AbsString::Kind::NumberStr:
    case AbsString::Kind::NotNumberStr:
    case AbsString::Kind::Top: {
        bool numbers = key.kind() != AbsString::Kind::NotNumberStr;
        bool others = key.kind() != AbsString::Kind::NumberStr;
        for (auto& [name, prop] : obj.properties) {
            bool numeric = is_number_string(name);
            if ((numeric && numbers) || (!numeric && others))
                prop.value = prop.value.join(value, k);
        }
        obj.default_field = obj.default_field.join(value, k);
        if (array && numbers)
            obj.internal_length = AbsNumber::top();
        else if (array && others)
            write_length(false);
        break;
    }
    }
    return { obj.internal_length };
}

// ---- objects

namespace {

template <class Combine>
AbstractObject combine(AbstractObject const& a, AbstractObject const& b, Combine value_op, size_t k)
{
    AbstractObject r;
    r.cls = a.cls;
    r.code = a.code;
    r.summary = a.summary || b.summary;
    for (auto const& [name, prop] : a.properties) {
        auto it = b.properties.find(name);
        if (it == b.properties.end())
            r.properties.emplace(name, Property { prop.value, false });
        else
            r.properties.emplace(name, Property { value_op(prop.value, it->second.value), prop.definite && it->second.definite });
    }
    for (auto const& [name, prop] : b.properties) {
        if (!a.properties.count(name))
            r.properties.emplace(name, Property { prop.value, false });
    }
    r.default_field = value_op(a.default_field, b.default_field);
    r.prototype = a.prototype;
    r.prototype.insert(b.prototype.begin(), b.prototype.end());
    r.scope = a.scope;
    r.scope.insert(b.scope.begin(), b.scope.end());
    (void)k;
    return r;
}

}

AbstractObject AbstractObject::join(AbstractObject const& other, size_t k) const
{
    AbstractObject r = combine(*this, other, [k](AbsValue const& x, AbsValue const& y) { return x.join(y, k); }, k);
    r.internal_length = internal_length.join(other.internal_length, k);
    return r;
}

AbstractObject AbstractObject::widen(AbstractObject const& next, size_t k) const
{
    AbstractObject r = combine(*this, next, [k](AbsValue const& x, AbsValue const& y) { return x.widen(y, k); }, k);
    r.internal_length = internal_length.widen(next.internal_length, k);
    return r;
}

bool AbstractObject::leq(AbstractObject const& other) const
{
    if (summary && !other.summary)
        return false;
    for (auto const& [name, prop] : properties) {
        auto it = other.properties.find(name);
        if (it == other.properties.end())
            return false;
        if (!prop.definite && it->second.definite)
            return false;
        if (!prop.value.leq(it->second.value))
            return false;
    }
    for (auto const& [name, prop] : other.properties) {
        if (prop.definite && !properties.count(name))
            return false;
    }
    return default_field.leq(other.default_field) && internal_length.leq(other.internal_length)
        && std::includes(other.prototype.begin(), other.prototype.end(), prototype.begin(), prototype.end())
        && std::includes(other.scope.begin(), other.scope.end(), scope.begin(), scope.end());
}

// ---- heap

AbstractObject const* AbstractHeap::get(Address a) const
{
    auto it = objects_.find(a);
    return it == objects_.end() ? nullptr : it->second.get();
}

AbstractObject& AbstractHeap::mutate(Address a)
{
    auto& slot = objects_[a];
    if (!slot)
        slot = std::make_shared<AbstractObject>();
    else if (slot.use_count() > 1)
        slot = std::make_shared<AbstractObject>(*slot);
    return *slot;
}

void AbstractHeap::put(Address a, AbstractObject obj) { objects_[a] = std::make_shared<AbstractObject>(std::move(obj)); }

size_t AbstractHeap::property_count() const
{
    size_t n = 0;
    for (auto const& [addr, obj] : objects_)
        n += obj->property_count();
    return n;
}

AbstractHeap AbstractHeap::join(AbstractHeap const& other, size_t k) const
{
    AbstractHeap r = *this;
    for (auto const& [addr, obj] : other.objects_) {
        auto it = r.objects_.find(addr);
        if (it == r.objects_.end())
            r.objects_.emplace(addr, obj);
        else if (it->second != obj && !(*it->second == *obj))
            it->second = std::make_shared<AbstractObject>(it->second->join(*obj, k));
    }
    return r;
}

AbstractHeap AbstractHeap::widen(AbstractHeap const& next, size_t k) const
{
    AbstractHeap r = *this;
    for (auto const& [addr, obj] : next.objects_) {
        auto it = r.objects_.find(addr);
        if (it == r.objects_.end())
            r.objects_.emplace(addr, obj);
        else if (it->second != obj && !(*it->second == *obj))
            it->second = std::make_shared<AbstractObject>(it->second->widen(*obj, k));
    }
    return r;
}

bool AbstractHeap::leq(AbstractHeap const& other) const
{
    for (auto const& [addr, obj] : objects_) {
        auto it = other.objects_.find(addr);
        if (it == other.objects_.end())
            return false;
        if (it->second != obj && !obj->leq(*it->second))
            return false;
    }
    return true;
}

bool AbstractHeap::operator==(AbstractHeap const& other) const
{
    if (objects_.size() != other.objects_.size())
        return false;
    auto a = objects_.begin();
    auto b = other.objects_.begin();
    for (; a != objects_.end(); ++a, ++b) {
        if (a->first != b->first)
            return false;
        if (a->second != b->second && !(*a->second == *b->second))
            return false;
    }
    return true;
}

}
