// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "safepdf/domain/heap.hpp"
#include "safepdf/extract/extract.hpp"
#include "safepdf/model/registry.hpp"

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace safepdf::model {

using domain::AbstractHeap;
using domain::AbsValue;
using domain::Address;

// A registry function as materialized in the heap; Builtin objects store
// the index into ModelEnvironment::apis in their `code`.
struct ApiInfo {
    std::string path;
    Safety safety = Safety::Whitelisted;
    std::string builtin; // empty for template models
    AbsValue result;     // template models
};

// Concrete facts about the document that sharpen the model.
struct DocMeta {
    std::vector<std::string> field_names;
};

struct ModelEnvironment {
    std::shared_ptr<AbstractHeap const> heap;
    Address global;
    Address doc;
    Address event;
    std::vector<ApiInfo> apis;
    // Every object path ("app", "String.prototype", "@Field", ...).
    std::map<std::string, Address, std::less<>> objects;
    std::map<Address, std::string> names;
    // Fields returned by getField: one per known name, or the generic summary.
    std::map<std::string, Address, std::less<>> fields;
    bool fields_known = false;
    std::vector<Address> xfa_nodes;
    size_t k = domain::default_k;
    std::string registry_fingerprint;

    std::optional<Address> object(std::string_view path) const;
    // Renders model addresses by path, e.g. `#app.alert`.
    domain::AddressNamer namer() const;
};

// Throws ConfigError when the registry refers to missing paths.
ModelEnvironment build_environment(DocMeta const* meta, Registry const& registry = default_registry(),
                                   size_t k = domain::default_k);

// Adds the XFA object tree: `xfa` with one property per top-level node,
// children by name, `rawValue` ⊤Str and `resolveNode` yielding every node.
void model_xfa(ModelEnvironment& env, extract::XfaNode const& tree);

}
