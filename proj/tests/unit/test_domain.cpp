// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "safepdf/domain/heap.hpp"
#include "safepdf/js/ast.hpp"
#include "safepdf/js/number.hpp"
#include "lattice_laws.hpp"

#include <cmath>
#include <random>
#include <variant>

using namespace safepdf::domain;
namespace js = safepdf::js;

using safepdf::test::Gen;
using safepdf::test::number_pool;
using safepdf::test::string_pool;

TEST_CASE("number-string classification")
{
    CHECK(is_number_string(u"NaN"));
    CHECK(is_number_string(u"42"));
    CHECK(is_number_string(u" 1e3 "));
    CHECK(is_number_string(u"-Infinity"));
    CHECK_FALSE(is_number_string(u"foo"));
    CHECK_FALSE(is_number_string(u"bar"));
    CHECK_FALSE(is_number_string(u"length"));
    CHECK_FALSE(is_number_string(u"NaNa"));
}

TEST_CASE("string lattice examples")
{
    auto s = [](std::u16string v) { return AbsString::constant(std::move(v)); };
    CHECK(render(s(u"42").join(s(u"NaN"), 2)) == "\"42\"|\"NaN\"");
    CHECK(render(s(u"foo").join(s(u"bar"), 2)) == "\"bar\"|\"foo\"");
    CHECK(s(u"42").join(s(u"NaN"), 2).is_set());
    // beyond k the set collapses to its category
    CHECK(render(s(u"1").join(s(u"2"), 1)) == "Number");
    CHECK(render(s(u"a").join(s(u"1"), 1)) == "⊤Str");
    CHECK(AbsString::number_str().join(AbsString::not_number_str()).is_top());
    CHECK_FALSE(AbsString::number_str().leq(AbsString::not_number_str()));
    CHECK_FALSE(AbsString::not_number_str().leq(AbsString::number_str()));
    CHECK(s(u"NaN").leq(AbsString::number_str(3)));
    CHECK(s(u"length").leq(AbsString::not_number_str(6)));
    // the length annotation takes part in the order
    CHECK_FALSE(s(u"length").leq(AbsString::not_number_str(5)));

    AbsString a = s(u"a");
    AbsString ab = AbsString::of({ u"a", u"b" }, 2);
    CHECK(render(a.widen(ab, 1)) == "NotNumber");
    CHECK(render(a.widen(ab, 8)) == "NotNumber");
    CHECK(a.widen(a, 8) == a);
}

TEST_CASE("lattice laws over random values")
{
    auto sweep = safepdf::test::check_lattice_laws(12000, 20241014, 3);
    INFO(sweep.first_violation);
    CHECK(sweep.violations == 0);
    CHECK(sweep.samples >= 10000);
}

TEST_CASE("widening stabilizes ascending chains")
{
    for (size_t k : { 1, 2, 3, 8 }) {
        auto sweep = safepdf::test::check_widening_chains(k, k * 7919, 2500 / k + 200);
        INFO("k=", k, " str ", sweep.max_str_changes, " num ", sweep.max_num_changes, " other ", sweep.max_other_changes);
        CHECK(sweep.unsound_steps == 0);
        CHECK(sweep.within(k));
    }
}

TEST_CASE("per-component widening bound")
{
    // strings only: the worst chain visits each of the Set sizes, then a
    // category, then Top, then the unbounded length annotation
    size_t const k = 4;
    AbsString s = AbsString::constant(u"a");
    std::u16string next = u"a";
    size_t changes = 0;
    for (int i = 0; i < 40; ++i) {
        next += u'a';
        AbsString w = s.widen(s.join(AbsString::constant(next), k), k);
        if (i == 20)
            w = s.widen(w.join(AbsString::constant(u"7"), k), k);
        if (!(w == s))
            ++changes;
        s = w;
    }
    CHECK(changes <= 4 + k);
    CHECK(s.is_top());
}

namespace {

using Concrete = std::variant<std::monostate, std::nullptr_t, bool, double, std::u16string, Address>;

// Independent ES5 ToNumber / ToString / ToBoolean on concrete values.
std::optional<double> concrete_to_number(Concrete const& c)
{
    if (std::holds_alternative<std::monostate>(c))
        return NAN;
    if (std::holds_alternative<std::nullptr_t>(c))
        return 0.0;
    if (auto b = std::get_if<bool>(&c))
        return *b ? 1.0 : 0.0;
    if (auto d = std::get_if<double>(&c))
        return *d;
    if (auto s = std::get_if<std::u16string>(&c))
        return js::string_to_number(*s);
    return std::nullopt; // objects: not tracked
}

std::optional<std::u16string> concrete_to_string(Concrete const& c)
{
    if (std::holds_alternative<std::monostate>(c))
        return u"undefined";
    if (std::holds_alternative<std::nullptr_t>(c))
        return u"null";
    if (auto b = std::get_if<bool>(&c))
        return *b ? u"true" : u"false";
    if (auto d = std::get_if<double>(&c))
        return js::number_to_u16string(*d);
    if (auto s = std::get_if<std::u16string>(&c))
        return *s;
    return std::nullopt;
}

bool concrete_to_boolean(Concrete const& c)
{
    if (auto b = std::get_if<bool>(&c))
        return *b;
    if (auto d = std::get_if<double>(&c))
        return *d != 0 && !std::isnan(*d);
    if (auto s = std::get_if<std::u16string>(&c))
        return !s->empty();
    return std::holds_alternative<Address>(c);
}

bool member(AbsValue const& v, Concrete const& c)
{
    if (std::holds_alternative<std::monostate>(c))
        return v.undef;
    if (std::holds_alternative<std::nullptr_t>(c))
        return v.null;
    if (auto b = std::get_if<bool>(&c))
        return v.boolean.contains(*b);
    if (auto d = std::get_if<double>(&c))
        return v.num.contains(*d);
    if (auto s = std::get_if<std::u16string>(&c))
        return v.str.contains(*s);
    return v.addrs.count(std::get<Address>(c)) > 0;
}

std::vector<Concrete> sample(AbsValue const& v)
{
    std::vector<Concrete> out;
    if (v.undef)
        out.emplace_back(std::monostate {});
    if (v.null)
        out.emplace_back(nullptr);
    for (bool b : { true, false })
        if (v.boolean.contains(b))
            out.emplace_back(b);
    for (double d : number_pool)
        if (v.num.contains(d))
            out.emplace_back(d);
    for (auto const& s : string_pool)
        if (v.str.contains(s))
            out.emplace_back(s);
    if (v.str.is_set())
        for (auto const& s : v.str.values())
            out.emplace_back(s);
    for (Address a : v.addrs)
        out.emplace_back(a);
    return out;
}

} // namespace

TEST_CASE("coercions contain every concrete image")
{
    Gen g(99);
    for (int i = 0; i < 4000; ++i) {
        AbsValue v = g.value(g.coin() ? 2 : 8);
        AbsNumber n = to_number(v);
        AbsString s = to_string(v);
        AbsBool b = to_boolean(v);
        for (auto const& c : sample(v)) {
            REQUIRE(member(v, c));
            auto cn = concrete_to_number(c);
            CHECK((!cn || n.contains(*cn)));
            if (!cn)
                CHECK(n.is_top());
            auto cs = concrete_to_string(c);
            CHECK((!cs || s.contains(*cs)));
            if (!cs)
                CHECK(s.is_top());
            CHECK(b.contains(concrete_to_boolean(c)));
        }
    }
}

TEST_CASE("coercion examples")
{
    CHECK(render(to_number(AbsValue::string(u"42"))) == "42");
    CHECK(to_number(AbsValue::string(AbsString::top())).is_top());
    CHECK(render(to_number(AbsValue::string(AbsString::not_number_str()))) == "NaN");
    CHECK(render(to_string(AbsValue::number(AbsNumber::of({ 1, 0.5, 1e21, -0.0 })))) == "\"0\"|\"0.5\"|\"1\"|\"1e+21\"");
    CHECK(to_boolean(AbsValue::number(0.0)) == AbsBool::constant(false));
    CHECK(to_boolean(AbsValue::string(u"")) == AbsBool::constant(false));
    CHECK(to_boolean(AbsValue::address(Address::program(1))) == AbsBool::constant(true));
    CHECK(to_string(AbsValue::address(Address::program(1))).is_top());

    // random small number sets against the concrete formatter
    Gen g(5);
    for (int i = 0; i < 500; ++i) {
        std::set<double, NumberLess> values;
        std::set<std::u16string> expected;
        size_t n = 1 + g.pick(5);
        for (size_t j = 0; j < n; ++j) {
            double d = std::ldexp(static_cast<double>(g.rng() >> 11), static_cast<int>(g.pick(120)) - 80);
            if (g.coin())
                d = -d;
            values.insert(d);
        }
        for (double d : values)
            expected.insert(js::number_to_u16string(d));
        AbsString s = to_string(AbsNumber::of(values));
        REQUIRE(s.is_set());
        CHECK(s.values() == expected);
    }
}

TEST_CASE("rendering goldens")
{
    CHECK(render(AbsValue::bottom()) == "⊥");
    CHECK(render(AbsValue::string(AbsString::top())) == "⊤Str");
    CHECK(render(AbsValue::number(AbsNumber::top())) == "⊤Num");
    CHECK(render(AbsValue::string(u"Hello PDF!")) == "\"Hello PDF!\"");
    AbsValue fn = AbsValue::address(Address::program(2)).join(AbsValue::address(Address::program(1))).join(AbsValue::undefined());
    CHECK(render(fn) == "#1∪#2∪undef");
    AbsValue mixed = AbsValue::string(AbsString::not_number_str()).join(AbsValue::number(-0.0)).join(AbsValue::null_value());
    CHECK(render(mixed) == "-0∪NotNumber∪null");
    CHECK(render(AbsValue::boolean_value(AbsBool::top())) == "⊤Bool");
    CHECK(render(AbsValue::address(Address::program(3, 2))) == "#3@2");
    CHECK(render(AbsValue::address(Address::model(4))) == "#m4");
    CHECK(render(AbsValue::address(Address::of(AddressSpace::Scope, 5, 1))) == "#s5@1");
    CHECK(render(AbsValue::address(Address::of(AddressSpace::Proto, 6))) == "#p6");
    AddressNamer namer = [](Address a) { return a.space == AddressSpace::Model ? std::string("app") : std::string(); };
    CHECK(render(AbsValue::address(Address::model(0)), &namer) == "#app");
    CHECK(render(AbsValue::string(u"a\"\n")) == "\"a\\\"\\u000a\"");
}

TEST_CASE("parse_value round trip")
{
    CHECK(parse_value("TopStr")->str.is_top());
    CHECK(parse_value("number:⊤")->num.is_top());
    CHECK(parse_value("undefined")->undef);
    CHECK_FALSE(parse_value("\"unterminated").has_value());
    CHECK_FALSE(parse_value("12abc").has_value());
    Gen g(31337);
    for (int i = 0; i < 3000; ++i) {
        AbsValue v = g.value();
        std::string text = render(v);
        auto back = parse_value(text);
        REQUIRE(back.has_value());
        CHECK(render(*back) == text);
    }
}

namespace {

AbstractObject listing_array()
{
    AbstractObject arr;
    arr.cls = ObjClass::Array;
    write_property(arr, AbsString::constant(u"0"), AbsValue::address(Address::program(1)), true);
    write_property(arr, AbsString::constant(u"1"), AbsValue::address(Address::program(2)), true);
    return arr;
}

} // namespace

TEST_CASE("property_match examples")
{
    AbstractObject arr = listing_array();
    CHECK(render(arr.internal_length) == "2");

    Match m = property_match(arr, AbsValue::number(AbsNumber::top()));
    CHECK(m.may_be_absent);
    AbsValue read = m.value;
    if (m.may_be_absent)
        read = read.join(AbsValue::undefined());
    CHECK(render(read) == "#1∪#2∪undef");

    Match len = property_match(arr, AbsValue::string(u"length"));
    CHECK_FALSE(len.may_be_absent);
    CHECK(render(len.value) == "2");

    Match index = property_match(arr, AbsValue::number(1));
    CHECK_FALSE(index.may_be_absent);
    CHECK(render(index.value) == "#2");

    AbstractObject obj;
    write_property(obj, AbsString::constant(u"a"), AbsValue::number(1), true);
    write_property(obj, AbsString::constant(u"b"), AbsValue::number(2), true);
    write_property(obj, AbsString::constant(u"7"), AbsValue::number(3), true);
    Match nn = property_match(obj, AbsString::not_number_str());
    CHECK(render(nn.value) == "1|2");
    CHECK(nn.may_be_absent);
    Match num = property_match(obj, AbsString::number_str());
    CHECK(render(num.value) == "3");
}

TEST_CASE("property writes")
{
    AbstractObject arr = listing_array();
    write_property(arr, AbsString::constant(u"5"), AbsValue::number(0), true);
    CHECK(render(arr.internal_length) == "6");
    // weak write keeps the old value
    AbstractObject weak = listing_array();
    write_property(weak, AbsString::constant(u"0"), AbsValue::number(0), false);
    CHECK(render(property_match(weak, AbsValue::number(0)).value) == "#1∪0");
    // summary objects never take strong updates
    AbstractObject summary = listing_array();
    summary.summary = true;
    write_property(summary, AbsString::constant(u"0"), AbsValue::number(0), true);
    CHECK(render(property_match(summary, AbsValue::number(0)).value) == "#1∪0");
    // abstract keys land in the default field
    AbstractObject plain;
    write_property(plain, AbsString::top(), AbsValue::string(u"v"), true);
    Match m = property_match(plain, AbsValue::string(u"anything"));
    CHECK(m.may_be_absent);
    CHECK(render(m.value) == "\"v\"");
    AbstractObject grow = listing_array();
    write_property(grow, AbsString::number_str(), AbsValue::number(1), true);
    CHECK(grow.internal_length.is_top());
}

namespace {

using ConcreteObject = std::map<std::u16string, Concrete>;

// Draws a concrete object from the concretization of a non-array object.
std::optional<ConcreteObject> concretize(AbstractObject const& obj, Gen& g)
{
    ConcreteObject out;
    for (auto const& [name, prop] : obj.properties) {
        if (!prop.definite && g.coin())
            continue;
        auto choices = sample(prop.value);
        if (choices.empty()) {
            if (prop.definite)
                return std::nullopt; // no concrete object fits
            continue;
        }
        out[name] = choices[g.pick(choices.size())];
    }
    auto defaults = sample(obj.default_field);
    if (!defaults.empty()) {
        for (auto const& s : string_pool) {
            if (!obj.properties.count(s) && g.coin(30))
                out[s] = defaults[g.pick(defaults.size())];
        }
    }
    return out;
}

} // namespace

TEST_CASE("property_match soundness by sampling")
{
    Gen g(4242);
    std::u16string const names[] = { u"a", u"b", u"0", u"1", u"NaN", u"length", u"x", u"42" };
    for (int i = 0; i < 2000; ++i) {
        AbstractObject obj;
        size_t writes = g.pick(6);
        for (size_t w = 0; w < writes; ++w) {
            AbsString key = g.coin(75) ? AbsString::constant(names[g.pick(std::size(names))]) : g.str(2);
            AbsValue value = g.value(2);
            value.addrs.clear();
            write_property(obj, key, value, g.coin());
            if (g.coin(20))
                obj.summary = true;
        }
        AbsString key = g.str(3);
        Match m = property_match(obj, key);
        AbsValue read = m.value;
        if (m.may_be_absent)
            read = read.join(AbsValue::undefined());
        for (int t = 0; t < 6; ++t) {
            auto drawn = concretize(obj, g);
            if (!drawn)
                continue;
            ConcreteObject const& concrete = *drawn;
            for (auto const& s : string_pool) {
                if (!key.contains(s))
                    continue;
                auto it = concrete.find(s);
                Concrete got = it == concrete.end() ? Concrete { std::monostate {} } : it->second;
                if (!member(read, got)) {
                    std::string props;
                    for (auto const& [n, p] : obj.properties)
                        props += js::utf16_to_utf8(n) + (p.definite ? "=" : "?=") + render(p.value) + " ";
                    INFO("props ", props, " default ", render(obj.default_field), " key ", render(key), " s ", js::utf16_to_utf8(s), " read ", render(read));
                    CHECK(member(read, got));
                }
            }
        }
    }
}

TEST_CASE("object and heap joins")
{
    AbstractObject a, b;
    write_property(a, AbsString::constant(u"x"), AbsValue::number(1), true);
    write_property(b, AbsString::constant(u"y"), AbsValue::number(2), true);
    AbstractObject j = a.join(b);
    CHECK_FALSE(j.properties.at(u"x").definite);
    CHECK_FALSE(j.properties.at(u"y").definite);
    CHECK(a.leq(j));
    CHECK(b.leq(j));
    CHECK_FALSE(j.leq(a));

    AbstractHeap h1, h2;
    h1.put(Address::program(1), a);
    h2.put(Address::program(1), b);
    h2.put(Address::program(2), a);
    AbstractHeap hj = h1.join(h2);
    CHECK(hj.size() == 2);
    CHECK(h1.leq(hj));
    CHECK(h2.leq(hj));
    CHECK(hj == h2.join(h1));

    // copy on write: mutating a copy leaves the original untouched
    AbstractHeap copy = h1;
    write_property(copy.mutate(Address::program(1)), AbsString::constant(u"x"), AbsValue::number(9), true);
    CHECK(render(property_match(*h1.get(Address::program(1)), AbsValue::string(u"x")).value) == "1");
    CHECK(render(property_match(*copy.get(Address::program(1)), AbsValue::string(u"x")).value) == "9");
    CHECK_FALSE(copy == h1);
}
