// SPDX-License-Identifier: Apache-2.0
#include "safepdf/model/environment.hpp"

#include "safepdf/js/ast.hpp"

namespace safepdf::model {

using domain::AbsString;
using domain::AbstractObject;
using domain::ObjClass;

std::optional<Address> ModelEnvironment::object(std::string_view path) const
{
    auto it = objects.find(path);
    if (it == objects.end())
        return std::nullopt;
    return it->second;
}

domain::AddressNamer ModelEnvironment::namer() const
{
    // copy: the namer may outlive a moved environment
    auto table = std::make_shared<std::map<Address, std::string>>(names);
    return [table](Address a) -> std::string {
        auto it = table->find(a);
        return it == table->end() ? std::string() : it->second;
    };
}

namespace {

std::u16string u16(std::string_view s) { return js::utf8_to_utf16(s); }

struct Builder {
    ModelEnvironment& env;
    AbstractHeap heap;
    uint32_t next_id = 0;

    Address fresh(std::string const& name)
    {
        Address a = Address::model(next_id++);
        env.names[a] = name;
        return a;
    }

    void set(Address obj, std::string_view name, AbsValue const& value)
    {
        domain::write_property(heap.mutate(obj), AbsString::constant(u16(name)), value, true, env.k);
    }

    std::set<Address> proto(std::string_view path)
    {
        auto a = env.object(path);
        return a ? std::set<Address> { *a } : std::set<Address> {};
    }
};

std::pair<std::string, std::string> split_path(std::string const& path)
{
    size_t dot = path.rfind('.');
    if (dot == std::string::npos)
        return { {}, path };
    return { path.substr(0, dot), path.substr(dot + 1) };
}

}

ModelEnvironment build_environment(DocMeta const* meta, Registry const& registry, size_t k)
{
    ModelEnvironment env;
    env.k = k;
    env.registry_fingerprint = registry.fingerprint();
    Builder b { env, {}, 0 };

    env.global = b.fresh("global");
    env.doc = b.fresh("this");
    env.objects["this"] = env.doc;
    b.heap.mutate(env.global).cls = ObjClass::Environment;
    b.heap.mutate(env.global).scope = { env.doc };
    b.heap.mutate(env.doc);

    // objects and functions first, so prototypes can be linked afterwards
    for (auto const& e : registry.entries()) {
        if (e.safety == Safety::Value || e.path == "this")
            continue;
        Address a = b.fresh(e.path);
        env.objects[e.path] = a;
        AbstractObject& obj = b.heap.mutate(a);
        if (is_function(e.safety)) {
            obj.cls = ObjClass::Builtin;
            obj.code = static_cast<uint32_t>(env.apis.size());
            ApiInfo info { e.path, e.safety, {}, {} };
            if (e.model.rfind("builtin:", 0) == 0)
                info.builtin = e.model.substr(8);
            else
                info.result = domain::parse_value(e.model, k).value_or(AbsValue::top_primitive());
            env.apis.push_back(std::move(info));
        }
    }
    std::vector<Address> summaries;
    for (auto const& [path, a] : env.objects) {
        ApiEntry const* e = registry.find(path);
        AbstractObject& obj = b.heap.mutate(a);
        std::string proto_path = obj.cls == ObjClass::Builtin ? "Function.prototype" : "Object.prototype";
        if (e && e->safety == Safety::Object) {
            std::string_view flags = e->model;
            while (!flags.empty()) {
                size_t comma = flags.find(',');
                std::string_view flag = flags.substr(0, comma);
                flags = comma == std::string_view::npos ? std::string_view {} : flags.substr(comma + 1);
                if (flag == "summary")
                    summaries.push_back(a);
                else if (flag.rfind("proto=", 0) == 0)
                    proto_path = std::string(flag.substr(6));
            }
        }
        if (path != "Object.prototype")
            obj.prototype = b.proto(proto_path);
    }
    // constructor prototypes of arrays and functions
    if (auto a = env.object("Array.prototype"))
        b.heap.mutate(*a).cls = ObjClass::Array, b.heap.mutate(*a).internal_length = domain::AbsNumber::constant(0);

    for (auto const& e : registry.entries()) {
        if (e.path == "this")
            continue;
        auto [parent, name] = split_path(e.path);
        AbsValue value;
        if (e.safety == Safety::Value) {
            if (e.model.rfind("ref:", 0) == 0) {
                auto target = env.object(e.model.substr(4));
                if (!target)
                    throw ConfigError(0, e.path + " references a non-object");
                value = AbsValue::address(*target);
            } else {
                value = domain::parse_value(e.model, k).value_or(AbsValue::top_primitive());
            }
        } else {
            value = AbsValue::address(env.objects.at(e.path));
        }
        if (parent.empty()) {
            if (name[0] != '@')
                b.set(env.global, name, value);
            continue;
        }
        auto owner = env.object(parent);
        if (!owner)
            throw ConfigError(0, e.path + " has no object parent");
        b.set(*owner, name, value);
    }
    for (Address a : summaries)
        b.heap.mutate(a).summary = true;

    if (auto ev = env.object("event"))
        env.event = *ev;
    else
        env.event = b.fresh("event");

    auto field_template = env.object("@Field");
    if (meta && !meta->field_names.empty() && field_template) {
        env.fields_known = true;
        AbstractObject proto_copy = *b.heap.get(*field_template);
        proto_copy.summary = false;
        for (auto const& name : meta->field_names) {
            if (env.fields.count(name))
                continue;
            Address a = b.fresh("field:" + name);
            AbstractObject obj = proto_copy;
            domain::write_property(obj, AbsString::constant(u"name"), AbsValue::string(u16(name)), true, k);
            b.heap.put(a, std::move(obj));
            env.fields[name] = a;
        }
    } else if (field_template) {
        env.fields["*"] = *field_template;
    }
    env.heap = std::make_shared<AbstractHeap const>(std::move(b.heap));
    return env;
}

void model_xfa(ModelEnvironment& env, extract::XfaNode const& tree)
{
    AbstractHeap heap = *env.heap;
    uint32_t next_id = 0;
    for (auto const& [a, name] : env.names)
        next_id = std::max(next_id, a.site + 1);
    auto fresh = [&](std::string const& name) {
        Address a = Address::model(next_id++);
        env.names[a] = name;
        return a;
    };
    auto object_proto = env.object("Object.prototype");
    auto function_proto = env.object("Function.prototype");

    Address resolve = fresh("xfa.resolveNode");
    {
        AbstractObject& fn = heap.mutate(resolve);
        fn.cls = ObjClass::Builtin;
        fn.code = static_cast<uint32_t>(env.apis.size());
        if (function_proto)
            fn.prototype = { *function_proto };
        env.apis.push_back(ApiInfo { "xfa.resolveNode", Safety::Whitelisted, "resolveNode", {} });
    }
    Address root = fresh("xfa");
    env.objects["xfa"] = root;

    auto set = [&](Address obj, std::u16string const& name, AbsValue const& value) {
        AbstractObject& o = heap.mutate(obj);
        auto existing = domain::property_match(o, AbsString::constant(name), env.k);
        AbsValue v = existing.may_be_absent ? value : existing.value.join(value, env.k);
        domain::write_property(o, AbsString::constant(name), v, true, env.k);
    };
    auto init = [&](Address a, bool node) {
        AbstractObject& o = heap.mutate(a);
        if (object_proto)
            o.prototype = { *object_proto };
        set(a, u"resolveNode", AbsValue::address(resolve));
        if (node) {
            set(a, u"rawValue", AbsValue::string(AbsString::top()));
            set(a, u"name", AbsValue::string(AbsString::top()));
        }
    };
    init(root, false);

    struct Item {
        extract::XfaNode const* node;
        Address parent;
        std::string path;
    };
    std::vector<Item> work { { &tree, root, "xfa" } };
    while (!work.empty()) {
        Item item = work.back();
        work.pop_back();
        std::string path = item.path + "." + item.node->name;
        Address a = fresh(path);
        env.xfa_nodes.push_back(a);
        init(a, true);
        std::u16string name = js::utf8_to_utf16(item.node->name);
        set(item.parent, name, AbsValue::address(a));
        for (auto it = item.node->children.rbegin(); it != item.node->children.rend(); ++it)
            work.push_back({ &*it, a, path });
    }
    // the packet root's children are also reachable directly from `xfa`
    if (!env.xfa_nodes.empty()) {
        Address top = env.xfa_nodes.front();
        for (auto const& [name, prop] : heap.get(top)->properties) {
            if (name != u"rawValue" && name != u"name" && name != u"resolveNode")
                set(root, name, prop.value);
        }
    }
    AbstractObject& global = heap.mutate(env.global);
    domain::write_property(global, AbsString::constant(u"xfa"), AbsValue::address(root), true, env.k);
    env.heap = std::make_shared<AbstractHeap const>(std::move(heap));
}

}
