// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/heap.hpp"
#include "safepdf/model/environment.hpp"

#include <string_view>
#include <vector>

namespace safepdf::model {

using domain::AbsString;
using domain::AbstractObject;
using domain::ObjClass;

// Services the interpreter provides to model functions. All operations act
// on the interpreter's current state.
class Host {
public:
    virtual ~Host() = default;

    virtual ModelEnvironment const& environment() const = 0;
    virtual size_t k() const = 0;
    // Longest concrete string kept before switching to a category.
    virtual uint64_t string_cap() const = 0;

    virtual AbstractObject const* object(Address a) = 0;
    virtual AbstractObject& mutate(Address a) = 0;
    // A fresh object owned by the current call site; `slot` separates
    // several objects created by one call.
    virtual Address allocate(ObjClass cls, std::string_view proto, uint32_t slot = 0) = 0;

    virtual AbsValue get(AbsValue const& base, AbsString const& key) = 0;
    virtual void put(AbsValue const& base, AbsString const& key, AbsValue const& value) = 0;
    virtual AbsValue call(AbsValue const& callee, AbsValue const& this_value, std::vector<AbsValue> const& args) = 0;

    // A TypeError may be thrown here.
    virtual void type_error(std::string_view what) = 0;
    virtual void log_api(ApiInfo const& api, std::vector<AbsValue> const& args) = 0;
    virtual void note_string(AbsString const& s) = 0;
    virtual void note_array(Address a) = 0;
};

// Applies the entry's model: logs the call, evaluates the template or
// built-in, and returns the result.
AbsValue dispatch_api(ApiInfo const& api, Host& host, AbsValue const& this_value, std::vector<AbsValue> const& args,
                      bool construct);

// Concrete unescape/escape as used by the model.
std::u16string unescape_string(std::u16string_view s);
std::u16string escape_string(std::u16string_view s);

}
