// SPDX-License-Identifier: Apache-2.0
#include "safepdf/model/builtins.hpp"
#include "safepdf/model/environment.hpp"
#include "safepdf/model/registry.hpp"

#include "safepdf/js/ast.hpp"

#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

using namespace safepdf;
using namespace safepdf::model;
using domain::AbsString;
using domain::AbsValue;

namespace {

std::string slurp(std::string const& path)
{
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string read_value(ModelEnvironment const& env, domain::Address obj, std::u16string const& key)
{
    auto const* o = env.heap->get(obj);
    REQUIRE(o != nullptr);
    auto m = domain::property_match(*o, AbsString::constant(key), env.k);
    auto namer = env.namer();
    return domain::render(m.value, &namer);
}

domain::Address object_at(ModelEnvironment const& env, domain::Address obj, std::u16string const& key)
{
    auto const* o = env.heap->get(obj);
    REQUIRE(o != nullptr);
    auto m = domain::property_match(*o, AbsString::constant(key), env.k);
    REQUIRE(m.value.addrs.size() == 1);
    return *m.value.addrs.begin();
}

size_t config_error_line(std::string const& text)
{
    try {
        parse_registry(text);
    } catch (ConfigError const& e) {
        return e.line();
    }
    return static_cast<size_t>(-1);
}

}

TEST_CASE("default registry matches the data file and round-trips")
{
    std::string text = slurp(std::string(SAFEPDF_TEST_DATA) + "/../../data/registry.txt");
    REQUIRE(!text.empty());
    CHECK(default_registry_text() == text);

    Registry const& reg = default_registry();
    Registry again = parse_registry(serialize_registry(reg));
    CHECK(again == reg);
    CHECK(again.fingerprint() == reg.fingerprint());
    CHECK(reg.fingerprint().size() == 16);

    ApiEntry const* alert = reg.find("app.alert");
    REQUIRE(alert);
    CHECK(alert->safety == Safety::Whitelisted);
    CHECK(reg.find("featureA.newObject")->safety == Safety::Vulnerable);
    CHECK(reg.find("eval")->safety == Safety::EvalLike);
    CHECK(reg.find("app.viewerVersion")->safety == Safety::Value);
}

TEST_CASE("registry errors carry line numbers")
{
    CHECK(config_error_line("a object\na.b bogus undef\n") == 2);
    CHECK(config_error_line("x whitelisted builtin:nope\n") == 1);
    CHECK(config_error_line("x value builtin:eval\n") == 1);
    CHECK(config_error_line("a object\nf whitelisted ref:a\n") == 2);
    CHECK(config_error_line("a object\na object\n") == 2);
    CHECK(config_error_line("# c\n\na.b value 1\n") == 3);
    CHECK(config_error_line("x value ((\n") == 1);
    CHECK(config_error_line("x value ref:missing\n") == 0);
    CHECK(config_error_line("x object frozen\n") == 1);
    CHECK(config_error_line("x value 1 2\n") == 1);
    CHECK(config_error_line("a..b value 1\n") == 1);
    CHECK(config_error_line("x value 1\nx.y value 2\n") == 2);
    CHECK_NOTHROW(parse_registry("a object summary,proto=b\nb object\na.f vulnerable ⊤Str∪null\n"));
}

TEST_CASE("environment exposes the viewer objects")
{
    ModelEnvironment env = build_environment(nullptr);
    domain::Address app = object_at(env, env.global, u"app");
    CHECK(read_value(env, app, u"viewerVersion") == "⊤Num");
    CHECK(read_value(env, app, u"platform") == "\"MAC\"|\"UNIX\"|\"WIN\"");
    CHECK(read_value(env, app, u"alert") == "#app.alert");
    CHECK(read_value(env, env.global, u"undefined") == "undef");

    // the document is the global object's outer scope
    auto const* global = env.heap->get(env.global);
    CHECK(global->cls == domain::ObjClass::Environment);
    CHECK(global->scope == std::set<domain::Address> { env.doc });
    CHECK(read_value(env, env.doc, u"getField") == "#this.getField");

    domain::Address alert = object_at(env, app, u"alert");
    auto const* fn = env.heap->get(alert);
    CHECK(fn->cls == domain::ObjClass::Builtin);
    REQUIRE(fn->code < env.apis.size());
    CHECK(env.apis[fn->code].path == "app.alert");
    CHECK(env.apis[fn->code].safety == Safety::Whitelisted);
    CHECK(domain::render(env.apis[fn->code].result) == "⊤Num");
    CHECK(fn->prototype == std::set<domain::Address> { *env.object("Function.prototype") });

    CHECK(read_value(env, env.event, u"target") == "#@DomNode");
    CHECK(read_value(env, env.event, u"willCommit") == "⊤Bool");
    CHECK(read_value(env, env.event, u"rc") == "true");

    auto const* node = env.heap->get(*env.object("@DomNode"));
    CHECK(node->summary);
    CHECK(node->prototype == std::set<domain::Address> { *env.object("@Field") });
    CHECK(env.heap->get(*env.object("@Field"))->summary);
    CHECK(!env.heap->get(app)->summary);

    // templates are not globals
    auto m = domain::property_match(*global, AbsString::constant(u"@Field"), env.k);
    CHECK(m.value.is_bottom());
    CHECK(!env.fields_known);
    CHECK(env.fields.at("*") == *env.object("@Field"));
}

TEST_CASE("document metadata gives one object per field")
{
    DocMeta meta { { "name", "zip" } };
    ModelEnvironment env = build_environment(&meta);
    CHECK(env.fields_known);
    REQUIRE(env.fields.size() == 2);
    domain::Address zip = env.fields.at("zip");
    CHECK(read_value(env, zip, u"name") == "\"zip\"");
    CHECK(read_value(env, zip, u"value") == "⊤Str");
    CHECK(!env.heap->get(zip)->summary);
}

TEST_CASE("custom registries replace the model")
{
    Registry reg = parse_registry("app object\napp.viewerVersion value 9\napp.alert vulnerable \"x\"\n");
    ModelEnvironment env = build_environment(nullptr, reg);
    domain::Address app = object_at(env, env.global, u"app");
    CHECK(read_value(env, app, u"viewerVersion") == "9");
    domain::Address alert = object_at(env, app, u"alert");
    CHECK(env.apis[env.heap->get(alert)->code].safety == Safety::Vulnerable);
    CHECK(env.registry_fingerprint == reg.fingerprint());
    CHECK(env.registry_fingerprint != default_registry().fingerprint());
}

TEST_CASE("xfa tree becomes an object graph")
{
    extract::XfaNode root;
    root.name = "form1";
    extract::XfaNode field;
    field.name = "field1";
    extract::XfaNode sub;
    sub.name = "inner";
    field.children.push_back(sub);
    root.children.push_back(field);

    ModelEnvironment env = build_environment(nullptr);
    model_xfa(env, root);
    domain::Address xfa = object_at(env, env.global, u"xfa");
    domain::Address form = object_at(env, xfa, u"form1");
    domain::Address f1 = object_at(env, form, u"field1");
    CHECK(read_value(env, f1, u"rawValue") == "⊤Str");
    CHECK(object_at(env, xfa, u"field1") == f1);
    domain::Address inner = object_at(env, f1, u"inner");
    CHECK(env.names.at(inner) == "xfa.form1.field1.inner");
    CHECK(env.xfa_nodes.size() == 3);
    domain::Address resolve = object_at(env, xfa, u"resolveNode");
    auto const* fn = env.heap->get(resolve);
    CHECK(env.apis[fn->code].builtin == "resolveNode");
}

TEST_CASE("escape and unescape")
{
    CHECK(escape_string(u"a b+ü€@*_-./~") == u"a%20b+%FC%u20AC@*_-./%7E");
    CHECK(unescape_string(u"%u4141%41%zz%u12%") == u"䅁A%zz%u12%");
    CHECK(unescape_string(u"%u0c0c%u0C0c") == u"ఌఌ");

    std::mt19937 rng(7);
    std::uniform_int_distribution<int> len(0, 12);
    std::uniform_int_distribution<int> unit(0, 0xffff);
    for (int i = 0; i < 2000; ++i) {
        std::u16string s;
        for (int n = len(rng); n > 0; --n)
            s += static_cast<char16_t>(i % 2 ? unit(rng) : unit(rng) % 128);
        CHECK(unescape_string(escape_string(s)) == s);
    }
}
