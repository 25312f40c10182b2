// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/values.hpp"

#include <map>
#include <memory>

namespace safepdf::domain {

enum class ObjClass : uint8_t {
    Plain,
    Array,
    Function, // user code; `code` indexes the unit's function table
    Builtin,  // model API; `code` is the registry entry id
    Regex,
    Error,
    Environment, // scope record; `scope` is the outer environment
    Field,
    Date,
    Arguments,
};

std::string_view class_name(ObjClass c);

struct Property {
    AbsValue value;
    bool definite = true; // present on every path
    bool operator==(Property const&) const = default;
};

struct AbstractObject {
    ObjClass cls = ObjClass::Plain;
    std::map<std::u16string, Property> properties;
    // Values written through keys that only matched abstractly.
    AbsValue default_field;
    // Arrays: the number of items. Unused (bottom) for other classes.
    AbsNumber internal_length;
    std::set<Address> prototype;
    // Functions: captured environment. Environments: outer environment.
    std::set<Address> scope;
    uint32_t code = 0;
    // Allocated more than once; only weak updates apply.
    bool summary = false;

    bool operator==(AbstractObject const&) const = default;

    AbstractObject join(AbstractObject const& other, size_t k = default_k) const;
    AbstractObject widen(AbstractObject const& next, size_t k = default_k) const;
    bool leq(AbstractObject const& other) const;
    size_t property_count() const { return properties.size(); }
};

// Canonical property name for an array index, if `s` is one.
std::optional<uint32_t> array_index(std::u16string_view s);

// Property-name view of a key value: ES5 ToString with numbers formatted
// per Number::toString.
AbsString to_property_key(AbsValue const& key, size_t k = default_k);

struct Match {
    AbsValue value;
    bool may_be_absent = false;
};

// Own-property lookup (prototypes are the caller's concern).
Match property_match(AbstractObject const& obj, AbsString const& key, size_t k = default_k);
Match property_match(AbstractObject const& obj, AbsValue const& key, size_t k = default_k);

struct WriteResult {
    // Array length may now exceed every finite bound the caller checks.
    AbsNumber new_length;
};

// Strong updates require a single concrete key and a non-summary object;
// `strong` requests one when allowed.
WriteResult write_property(AbstractObject& obj, AbsString const& key, AbsValue const& value, bool strong,
                           size_t k = default_k);

class AbstractHeap {
public:
    using Map = std::map<Address, std::shared_ptr<AbstractObject>>;

    AbstractObject const* get(Address a) const;
    bool contains(Address a) const { return objects_.count(a) > 0; }
    // Copy-on-write access; creates an empty object when missing.
    AbstractObject& mutate(Address a);
    void put(Address a, AbstractObject obj);
    void erase(Address a) { objects_.erase(a); }

    Map const& objects() const { return objects_; }
    size_t size() const { return objects_.size(); }
    size_t property_count() const;

    AbstractHeap join(AbstractHeap const& other, size_t k = default_k) const;
    AbstractHeap widen(AbstractHeap const& next, size_t k = default_k) const;
    bool leq(AbstractHeap const& other) const;
    bool operator==(AbstractHeap const& other) const;

private:
    Map objects_;
};

}
