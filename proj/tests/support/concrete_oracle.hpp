// SPDX-License-Identifier: Apache-2.0
#pragma once

// Concrete reference interpreter for a generated subset of the language, the
// program generator, and the containment check against abstract results.

#include "safepdf/interp/interp.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace safepdf::test::oracle {

using domain::AbsString;
using domain::AbsValue;


struct Undef {
    bool operator==(Undef const&) const = default;
};
struct Null {
    bool operator==(Null const&) const = default;
};
struct Ref {
    size_t id;
    bool operator==(Ref const&) const = default;
};
using Value = std::variant<Undef, Null, bool, double, std::u16string, Ref>;

struct Thrown {
    Value value;
};
struct Returned {
    Value value;
};
struct Broke {};
struct OutOfFuel {};

inline std::u16string ascii(std::string const& s) { return std::u16string(s.begin(), s.end()); }

// Shortest round-tripping digits, then the ES5 layout rules.
inline std::u16string number_text(double d)
{
    if (std::isnan(d))
        return u"NaN";
    if (d == 0)
        return u"0";
    if (std::isinf(d))
        return d < 0 ? u"-Infinity" : u"Infinity";
    if (d < 0)
        return u"-" + number_text(-d);
    char buf[64];
    int precision = 1;
    for (; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*e", precision - 1, d);
        if (std::strtod(buf, nullptr) == d)
            break;
    }
    std::string text = buf;
    std::string mantissa = text.substr(0, text.find('e'));
    int exponent = std::stoi(text.substr(text.find('e') + 1));
    std::string digits;
    for (char c : mantissa)
        if (c != '.')
            digits += c;
    while (digits.size() > 1 && digits.back() == '0')
        digits.pop_back();
    int k = static_cast<int>(digits.size());
    int n = exponent + 1;
    std::string out;
    if (k <= n && n <= 21)
        out = digits + std::string(n - k, '0');
    else if (0 < n && n <= 21)
        out = digits.substr(0, n) + "." + digits.substr(n);
    else if (-6 < n && n <= 0)
        out = "0." + std::string(-n, '0') + digits;
    else {
        std::string e = (n - 1 >= 0 ? "+" : "-") + std::to_string(std::abs(n - 1));
        out = k == 1 ? digits + "e" + e : digits.substr(0, 1) + "." + digits.substr(1) + "e" + e;
    }
    return ascii(out);
}

inline double text_number(std::u16string const& s16)
{
    std::string s;
    for (char16_t c : s16) {
        if (c > 127)
            return NAN;
        s += static_cast<char>(c);
    }
    size_t b = s.find_first_not_of(" \t\n\r\v\f");
    if (b == std::string::npos)
        return 0;
    s = s.substr(b, s.find_last_not_of(" \t\n\r\v\f") - b + 1);
    if (s == "Infinity" || s == "+Infinity")
        return INFINITY;
    if (s == "-Infinity")
        return -INFINITY;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        double v = 0;
        for (size_t i = 2; i < s.size(); ++i) {
            if (!std::isxdigit(static_cast<unsigned char>(s[i])))
                return NAN;
            v = v * 16 + std::stoi(std::string(1, s[i]), nullptr, 16);
        }
        return v;
    }
    size_t i = 0;
    if (s[i] == '+' || s[i] == '-')
        ++i;
    size_t int_digits = 0, frac_digits = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
        ++i, ++int_digits;
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
            ++i, ++frac_digits;
    }
    if (int_digits + frac_digits == 0)
        return NAN;
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < s.size() && (s[i] == '+' || s[i] == '-'))
            ++i;
        size_t e = 0;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
            ++i, ++e;
        if (e == 0)
            return NAN;
    }
    if (i != s.size())
        return NAN;
    return std::strtod(s.c_str(), nullptr);
}

inline int32_t int32_of(double d)
{
    if (std::isnan(d) || std::isinf(d))
        return 0;
    double m = std::fmod(std::trunc(d), 4294967296.0);
    if (m < 0)
        m += 4294967296.0;
    return static_cast<int32_t>(static_cast<uint32_t>(m));
}

class Concrete {
public:
    struct Object {
        std::map<std::u16string, Value> props;
        bool array = false;
        js::Node const* fn = nullptr;
        size_t env = 0;
    };
    struct Env {
        std::map<std::u16string, Value> vars;
        size_t parent = SIZE_MAX;
    };

    std::vector<Object> heap;
    std::vector<Env> envs { Env {} };
    size_t max_string = 0;
    int fuel = 200000;

    void run(js::Program const& program)
    {
        envs[0].vars[u"undefined"] = Undef {};
        hoist(program.body, 0);
        try {
            for (auto const& s : program.body)
                exec(*s, 0, nullptr);
        } catch (Thrown const&) {
        }
    }

    Value const* global(std::u16string const& name) const
    {
        auto it = envs[0].vars.find(name);
        return it == envs[0].vars.end() ? nullptr : &it->second;
    }

private:
    Value type_error()
    {
        size_t id = heap.size();
        heap.push_back(Object {});
        heap[id].props[u"name"] = std::u16string(u"TypeError");
        throw Thrown { Ref { id } };
    }

    void hoist(std::vector<js::NodePtr> const& body, size_t env)
    {
        std::function<void(js::Node const&)> walk = [&](js::Node const& n) {
            if (n.kind == js::NodeKind::Function)
                return;
            if (n.kind == js::NodeKind::FunctionDecl) {
                envs[env].vars[n.text] = make_function(n, env);
                return;
            }
            if (n.kind == js::NodeKind::Declarator)
                envs[env].vars.emplace(n.text, Undef {});
            for (auto const* c : { n.a.get(), n.b.get(), n.c.get(), n.d.get() })
                if (c)
                    walk(*c);
            for (auto const& item : n.items)
                if (item)
                    walk(*item);
        };
        for (auto const& s : body)
            walk(*s);
    }

    Value make_function(js::Node const& fn, size_t env)
    {
        size_t id = heap.size();
        heap.push_back(Object {});
        heap[id].fn = &fn;
        heap[id].env = env;
        return Ref { id };
    }

    Value* lookup(std::u16string const& name, size_t env)
    {
        for (size_t e = env; e != SIZE_MAX; e = envs[e].parent) {
            auto it = envs[e].vars.find(name);
            if (it != envs[e].vars.end())
                return &it->second;
        }
        return nullptr;
    }

    void note(Value const& v)
    {
        if (auto const* s = std::get_if<std::u16string>(&v))
            max_string = std::max(max_string, s->size());
    }

    static bool truthy(Value const& v)
    {
        switch (v.index()) {
        case 0:
        case 1: return false;
        case 2: return std::get<bool>(v);
        case 3: {
            double d = std::get<double>(v);
            return !(d == 0 || std::isnan(d));
        }
        case 4: return !std::get<std::u16string>(v).empty();
        default: return true;
        }
    }

    std::u16string object_text(size_t id)
    {
        Object const& o = heap[id];
        if (o.fn)
            return u"function";
        if (!o.array)
            return u"[object Object]";
        double len = std::get<double>(o.props.at(u"length"));
        std::u16string out;
        for (size_t i = 0; i < static_cast<size_t>(len); ++i) {
            if (i)
                out += u",";
            auto it = o.props.find(number_text(static_cast<double>(i)));
            if (it != o.props.end() && it->second.index() > 1)
                out += to_string(it->second);
        }
        return out;
    }

    Value primitive(Value const& v)
    {
        if (auto const* r = std::get_if<Ref>(&v))
            return object_text(r->id);
        return v;
    }

    std::u16string to_string(Value const& v)
    {
        switch (v.index()) {
        case 0: return u"undefined";
        case 1: return u"null";
        case 2: return std::get<bool>(v) ? u"true" : u"false";
        case 3: return number_text(std::get<double>(v));
        case 4: return std::get<std::u16string>(v);
        default: return object_text(std::get<Ref>(v).id);
        }
    }

    double to_number(Value const& v)
    {
        switch (v.index()) {
        case 0: return NAN;
        case 1: return 0;
        case 2: return std::get<bool>(v) ? 1 : 0;
        case 3: return std::get<double>(v);
        case 4: return text_number(std::get<std::u16string>(v));
        default: return to_number(primitive(v));
        }
    }

    bool strict_eq(Value const& a, Value const& b)
    {
        if (a.index() != b.index())
            return false;
        if (a.index() == 3)
            return std::get<double>(a) == std::get<double>(b);
        return a == b;
    }

    bool loose_eq(Value const& a, Value const& b)
    {
        if (a.index() == b.index())
            return strict_eq(a, b);
        bool an = a.index() <= 1, bn = b.index() <= 1;
        if (an || bn)
            return an && bn;
        if (a.index() == 2)
            return loose_eq(to_number(a), b);
        if (b.index() == 2)
            return loose_eq(a, to_number(b));
        if (a.index() == 5)
            return loose_eq(primitive(a), b);
        if (b.index() == 5)
            return loose_eq(a, primitive(b));
        return to_number(a) == to_number(b);
    }

    // nullopt: undefined comparison result
    std::optional<bool> less(Value const& x, Value const& y)
    {
        Value a = primitive(x), b = primitive(y);
        if (a.index() == 4 && b.index() == 4)
            return std::get<std::u16string>(a) < std::get<std::u16string>(b);
        double p = to_number(a), q = to_number(b);
        if (std::isnan(p) || std::isnan(q))
            return std::nullopt;
        return p < q;
    }

    std::u16string type_name(Value const& v)
    {
        switch (v.index()) {
        case 0: return u"undefined";
        case 1: return u"object";
        case 2: return u"boolean";
        case 3: return u"number";
        case 4: return u"string";
        default: return heap[std::get<Ref>(v).id].fn ? u"function" : u"object";
        }
    }

    Value get(Value const& base, std::u16string const& key)
    {
        switch (base.index()) {
        case 0:
        case 1: return type_error();
        case 4: {
            auto const& s = std::get<std::u16string>(base);
            if (key == u"length")
                return static_cast<double>(s.size());
            double d = text_number(key);
            if (number_text(d) == key && d >= 0 && d < static_cast<double>(s.size()) && d == std::floor(d))
                return s.substr(static_cast<size_t>(d), 1);
            return Undef {};
        }
        case 5: {
            Object const& o = heap[std::get<Ref>(base).id];
            auto it = o.props.find(key);
            if (it != o.props.end())
                return it->second;
            if (o.fn && key == u"length")
                return static_cast<double>(o.fn->params.size());
            return Undef {};
        }
        default: return Undef {};
        }
    }

    void put(Value const& base, std::u16string const& key, Value const& v)
    {
        if (base.index() <= 1)
            type_error();
        if (base.index() != 5)
            return;
        Object& o = heap[std::get<Ref>(base).id];
        if (o.array && key == u"length") {
            double len = to_number(v);
            double old = std::get<double>(o.props[u"length"]);
            for (double i = len; i < old; ++i)
                o.props.erase(number_text(i));
            o.props[u"length"] = len;
            return;
        }
        o.props[key] = v;
        if (o.array) {
            double d = text_number(key);
            if (number_text(d) == key && d >= 0 && d == std::floor(d) && d < 4294967295.0) {
                double& len = std::get<double>(o.props[u"length"]);
                len = std::max(len, d + 1);
            }
        }
    }

    Value call(Value const& callee, Value const& this_value, std::vector<Value> const& args)
    {
        auto const* r = std::get_if<Ref>(&callee);
        if (!r || !heap[r->id].fn)
            return type_error();
        js::Node const& fn = *heap[r->id].fn;
        size_t env = envs.size();
        envs.push_back(Env {});
        envs[env].parent = heap[r->id].env;
        for (size_t i = 0; i < fn.params.size(); ++i)
            envs[env].vars[fn.params[i]] = i < args.size() ? args[i] : Value { Undef {} };
        hoist(fn.items, env);
        (void)this_value;
        try {
            for (auto const& s : fn.items)
                exec(*s, env, nullptr);
        } catch (Returned const& ret) {
            return ret.value;
        }
        return Undef {};
    }

    struct RefT {
        bool name;
        std::u16string id;
        Value base;
    };

    RefT reference(js::Node const& target, size_t env)
    {
        if (target.kind == js::NodeKind::Identifier)
            return { true, target.text, Undef {} };
        Value base = eval(*target.a, env);
        std::u16string key = target.kind == js::NodeKind::Member ? target.text : to_string(primitive(eval(*target.b, env)));
        return { false, key, base };
    }

    Value read(RefT const& r, size_t env)
    {
        if (r.name) {
            Value* v = lookup(r.id, env);
            if (!v)
                return type_error();
            return *v;
        }
        return get(r.base, r.id);
    }

    void write(RefT const& r, Value const& v, size_t env)
    {
        note(v);
        if (r.name) {
            Value* slot = lookup(r.id, env);
            if (slot)
                *slot = v;
            else
                envs[0].vars[r.id] = v;
        } else {
            put(r.base, r.id, v);
        }
    }

    Value binary(js::Op op, Value const& l, Value const& r)
    {
        using js::Op;
        switch (op) {
        case Op::Add: {
            Value a = primitive(l), b = primitive(r);
            if (a.index() == 4 || b.index() == 4) {
                Value s = to_string(a) + to_string(b);
                note(s);
                return s;
            }
            return to_number(a) + to_number(b);
        }
        case Op::Sub: return to_number(l) - to_number(r);
        case Op::Mul: return to_number(l) * to_number(r);
        case Op::Div: return to_number(l) / to_number(r);
        case Op::Mod: return std::fmod(to_number(l), to_number(r));
        case Op::BitAnd: return static_cast<double>(int32_of(to_number(l)) & int32_of(to_number(r)));
        case Op::BitOr: return static_cast<double>(int32_of(to_number(l)) | int32_of(to_number(r)));
        case Op::BitXor: return static_cast<double>(int32_of(to_number(l)) ^ int32_of(to_number(r)));
        case Op::Shl:
            return static_cast<double>(
                static_cast<int32_t>(static_cast<uint32_t>(int32_of(to_number(l))) << (int32_of(to_number(r)) & 31)));
        case Op::Shr: return static_cast<double>(int32_of(to_number(l)) >> (int32_of(to_number(r)) & 31));
        case Op::Lt: return less(l, r).value_or(false);
        case Op::Gt: return less(r, l).value_or(false);
        case Op::Le: {
            auto x = less(r, l);
            return x && !*x;
        }
        case Op::Ge: {
            auto x = less(l, r);
            return x && !*x;
        }
        case Op::Eq: return loose_eq(l, r);
        case Op::Ne: return !loose_eq(l, r);
        case Op::StrictEq: return strict_eq(l, r);
        case Op::StrictNe: return !strict_eq(l, r);
        default: return Undef {};
        }
    }

    Value eval(js::Node const& n, size_t env)
    {
        using js::NodeKind;
        if (--fuel < 0)
            throw OutOfFuel {};
        switch (n.kind) {
        case NodeKind::Identifier: return read(RefT { true, n.text, Undef {} }, env);
        case NodeKind::Number: return n.number;
        case NodeKind::String: return n.text;
        case NodeKind::Boolean: return n.flag;
        case NodeKind::Null: return Null {};
        case NodeKind::Array: {
            std::vector<Value> items;
            for (auto const& item : n.items)
                items.push_back(eval(*item, env));
            size_t id = heap.size();
            heap.push_back(Object {});
            heap[id].array = true;
            for (size_t i = 0; i < items.size(); ++i)
                heap[id].props[number_text(static_cast<double>(i))] = items[i];
            heap[id].props[u"length"] = static_cast<double>(items.size());
            return Ref { id };
        }
        case NodeKind::Object: {
            std::vector<std::pair<std::u16string, Value>> props;
            for (auto const& p : n.items)
                props.push_back({ p->text, eval(*p->a, env) });
            size_t id = heap.size();
            heap.push_back(Object {});
            for (auto& [k, v] : props)
                heap[id].props[k] = v;
            return Ref { id };
        }
        case NodeKind::Function: return make_function(n, env);
        case NodeKind::Unary: {
            if (n.op == js::Op::Typeof) {
                if (n.a->kind == NodeKind::Identifier && !lookup(n.a->text, env))
                    return std::u16string(u"undefined");
                return type_name(eval(*n.a, env));
            }
            Value v = eval(*n.a, env);
            switch (n.op) {
            case js::Op::Not: return !truthy(v);
            case js::Op::Neg: return -to_number(v);
            case js::Op::Plus: return to_number(v);
            case js::Op::BitNot: return static_cast<double>(~int32_of(to_number(v)));
            case js::Op::Void: return Undef {};
            default: return Undef {};
            }
        }
        case NodeKind::Update: {
            RefT r = reference(*n.a, env);
            double old = to_number(read(r, env));
            double next = n.op == js::Op::Inc ? old + 1 : old - 1;
            write(r, next, env);
            return n.flag ? next : old;
        }
        case NodeKind::Binary: {
            Value l = eval(*n.a, env);
            Value r = eval(*n.b, env);
            return binary(n.op, l, r);
        }
        case NodeKind::Logical: {
            Value l = eval(*n.a, env);
            if (n.op == js::Op::And)
                return truthy(l) ? eval(*n.b, env) : l;
            return truthy(l) ? l : eval(*n.b, env);
        }
        case NodeKind::Conditional: return truthy(eval(*n.a, env)) ? eval(*n.b, env) : eval(*n.c, env);
        case NodeKind::Assign: {
            RefT r = reference(*n.a, env);
            Value v;
            if (n.assign_op == js::Op::None) {
                v = eval(*n.b, env);
            } else {
                Value old = read(r, env);
                v = binary(n.assign_op, old, eval(*n.b, env));
            }
            write(r, v, env);
            return v;
        }
        case NodeKind::Call: {
            Value callee, self = Undef {};
            if (n.a->kind == NodeKind::Member || n.a->kind == NodeKind::Index) {
                RefT r = reference(*n.a, env);
                callee = get(r.base, r.id);
                self = r.base;
            } else {
                callee = eval(*n.a, env);
            }
            std::vector<Value> args;
            for (auto const& a : n.items)
                args.push_back(eval(*a, env));
            return call(callee, self, args);
        }
        case NodeKind::Member:
        case NodeKind::Index: {
            RefT r = reference(n, env);
            return get(r.base, r.id);
        }
        case NodeKind::Sequence: {
            Value v = Undef {};
            for (auto const& item : n.items)
                v = eval(*item, env);
            return v;
        }
        default: return Undef {};
        }
    }

    void exec(js::Node const& n, size_t env, int* loop_depth)
    {
        using js::NodeKind;
        if (--fuel < 0)
            throw OutOfFuel {};
        switch (n.kind) {
        case NodeKind::VarDecl:
            for (auto const& d : n.items)
                if (d->a)
                    write(RefT { true, d->text, Undef {} }, eval(*d->a, env), env);
            return;
        case NodeKind::ExprStmt: eval(*n.a, env); return;
        case NodeKind::Block:
            for (auto const& s : n.items)
                exec(*s, env, loop_depth);
            return;
        case NodeKind::If:
            if (truthy(eval(*n.a, env)))
                exec(*n.b, env, loop_depth);
            else if (n.c)
                exec(*n.c, env, loop_depth);
            return;
        case NodeKind::While:
            try {
                while (truthy(eval(*n.a, env)))
                    exec(*n.b, env, loop_depth);
            } catch (Broke const&) {
            }
            return;
        case NodeKind::For:
            if (n.a) {
                if (n.a->kind == NodeKind::VarDecl)
                    exec(*n.a, env, loop_depth);
                else
                    eval(*n.a, env);
            }
            try {
                while (!n.b || truthy(eval(*n.b, env))) {
                    exec(*n.d, env, loop_depth);
                    if (n.c)
                        eval(*n.c, env);
                }
            } catch (Broke const&) {
            }
            return;
        case NodeKind::Break: throw Broke {};
        case NodeKind::Return: throw Returned { n.a ? eval(*n.a, env) : Value { Undef {} } };
        case NodeKind::Throw: throw Thrown { eval(*n.a, env) };
        case NodeKind::Try: {
            try {
                exec(*n.a, env, loop_depth);
            } catch (Thrown const& t) {
                size_t ce = envs.size();
                envs.push_back(Env {});
                envs[ce].parent = env;
                envs[ce].vars[n.text] = t.value;
                exec(*n.b, ce, loop_depth);
            }
            return;
        }
        case NodeKind::Switch: {
            Value d = eval(*n.a, env);
            std::optional<size_t> start;
            for (size_t i = 0; i < n.items.size() && !start; ++i)
                if (n.items[i]->a && strict_eq(d, eval(*n.items[i]->a, env)))
                    start = i;
            if (!start)
                for (size_t i = 0; i < n.items.size(); ++i)
                    if (!n.items[i]->a)
                        start = i;
            if (!start)
                return;
            try {
                for (size_t i = *start; i < n.items.size(); ++i)
                    for (auto const& s : n.items[i]->items)
                        exec(*s, env, loop_depth);
            } catch (Broke const&) {
            }
            return;
        }
        case NodeKind::FunctionDecl:
        case NodeKind::Empty: return;
        default: eval(n, env); return;
        }
    }
};

// ---- program generator

class Generator {
public:
    explicit Generator(uint32_t seed) : rng_(seed) {}

    std::string program()
    {
        out_.str({});
        functions_ = 0;
        out_ << "var a = " << literal() << ", b = " << literal() << ", c = " << literal() << ", d = " << literal()
             << ", o = {p: " << literal() << ", q: " << literal() << "}, arr = [" << literal() << ", " << literal()
             << "];\n";
        int fns = pick(3);
        for (int i = 0; i < fns; ++i) {
            out_ << "function f" << i << "(x, y) { var t = " << expr(2, true) << "; ";
            if (pick(2))
                out_ << "if (" << expr(1, true) << ") t = " << expr(2, true) << "; ";
            out_ << "return t; }\n";
            ++functions_;
        }
        int count = 3 + pick(6);
        for (int i = 0; i < count; ++i)
            statement(2);
        return out_.str();
    }

private:
    std::mt19937 rng_;
    std::ostringstream out_;
    int functions_ = 0;
    int counter_ = 0;

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }

    std::string literal()
    {
        static char const* const lits[] = { "0", "1", "2", "-1", "0.5", "3", "10", "\"\"", "\"a\"", "\"b\"", "\"1\"",
                                            "\"x y\"", "\"0\"", "\" 2 \"", "true", "false", "null", "undefined" };
        return lits[pick(static_cast<int>(std::size(lits)))];
    }

    std::string var(bool in_function)
    {
        static char const* const globals[] = { "a", "b", "c", "d" };
        if (in_function && pick(2))
            return pick(2) ? "x" : "y";
        return globals[pick(4)];
    }

    std::string expr(int depth, bool in_function = false)
    {
        if (depth <= 0)
            return pick(2) ? literal() : var(in_function);
        static char const* const ops[] = { "+", "-", "*", "/", "%", "<", ">", "<=", ">=", "==", "!=",
                                           "===", "!==", "&", "|", "^", "<<", ">>", "+", "+" };
        switch (pick(14)) {
        case 0:
        case 1:
        case 2:
            return "(" + expr(depth - 1, in_function) + " " + ops[pick(static_cast<int>(std::size(ops)))] + " "
                 + expr(depth - 1, in_function) + ")";
        case 3: return "(" + expr(depth - 1, in_function) + (pick(2) ? " && " : " || ") + expr(depth - 1, in_function) + ")";
        case 4: return "!" + expr(depth - 1, in_function);
        case 5: return "typeof " + var(in_function);
        case 6:
            return "(" + expr(depth - 1, in_function) + " ? " + expr(depth - 1, in_function) + " : "
                 + expr(depth - 1, in_function) + ")";
        case 7: return "-(" + expr(depth - 1, in_function) + ")";
        case 8: return pick(2) ? "arr.length" : "arr[" + expr(depth - 1, in_function) + "]";
        case 9: return pick(2) ? "o.p" : "o[" + expr(depth - 1, in_function) + "]";
        case 10:
            if (functions_ > 0 && !in_function)
                return "f" + std::to_string(pick(functions_)) + "(" + expr(depth - 1) + ", " + expr(depth - 1) + ")";
            return literal();
        case 11: return "(" + var(in_function) + " + \"\").length";
        default: return pick(2) ? literal() : var(in_function);
        }
    }

    void statement(int depth)
    {
        switch (depth > 0 ? pick(11) : pick(4)) {
        case 0:
        case 1: out_ << var(false) << " = " << expr(2) << ";\n"; return;
        case 2: out_ << var(false) << (pick(2) ? " += " : " -= ") << expr(1) << ";\n"; return;
        case 3:
            if (pick(2))
                out_ << "arr[" << expr(1) << "] = " << expr(1) << ";\n";
            else
                out_ << "o." << (pick(2) ? "p" : "r") << " = " << expr(1) << ";\n";
            return;
        case 4:
            out_ << "if (" << expr(2) << ") {\n";
            statement(depth - 1);
            out_ << "} else {\n";
            statement(depth - 1);
            out_ << "}\n";
            return;
        case 5: {
            std::string i = "i" + std::to_string(counter_++);
            out_ << "for (var " << i << " = 0; " << i << " < " << (1 + pick(5)) << "; " << i << "++) {\n";
            statement(depth - 1);
            if (pick(3) == 0)
                out_ << "if (" << expr(1) << ") break;\n";
            out_ << "}\n";
            return;
        }
        case 6: {
            std::string i = "w" + std::to_string(counter_++);
            out_ << "var " << i << " = " << (1 + pick(4)) << ";\nwhile (" << i << "-- > 0) {\n";
            statement(depth - 1);
            out_ << "}\n";
            return;
        }
        case 7:
            out_ << "try {\n";
            statement(depth - 1);
            if (pick(2))
                out_ << "if (" << expr(1) << ") throw " << expr(1) << ";\n";
            out_ << "} catch (err) {\n" << var(false) << " = err;\n}\n";
            return;
        case 8:
            out_ << "switch (" << var(false) << ") {\ncase " << literal() << ":\n";
            statement(depth - 1);
            if (pick(2))
                out_ << "break;\n";
            out_ << "case " << literal() << ":\n";
            statement(depth - 1);
            out_ << "break;\ndefault:\n";
            statement(depth - 1);
            out_ << "}\n";
            return;
        case 9:
            out_ << var(false) << " = arr = [" << expr(1) << ", " << expr(1) << "];\n";
            return;
        default: out_ << var(false) << " = " << var(false) << " + " << expr(1) << ";\n"; return;
        }
    }
};

// Whether the concrete value is described by the abstract one.
inline bool contained(Value const& c, AbsValue const& a, Concrete const& conc, interp::State const& state, int depth)
{
    switch (c.index()) {
    case 0: return a.undef;
    case 1: return a.null;
    case 2: return a.boolean.contains(std::get<bool>(c));
    case 3: return a.num.contains(std::get<double>(c));
    case 4: return a.str.contains(std::get<std::u16string>(c));
    default: break;
    }
    if (a.addrs.empty())
        return false;
    if (depth == 0)
        return true;
    auto const& obj = conc.heap[std::get<Ref>(c).id];
    for (auto const& [key, value] : obj.props) {
        AbsValue joined;
        for (auto addr : a.addrs)
            if (auto const* o = state.heap.get(addr))
                joined = joined.join(domain::property_match(*o, AbsString::constant(key)).value);
        if (!contained(value, joined, conc, state, depth - 1))
            return false;
    }
    return true;
}

inline std::string describe(Value const& v)
{
    switch (v.index()) {
    case 0: return "undefined";
    case 1: return "null";
    case 2: return std::get<bool>(v) ? "true" : "false";
    case 3: return js::utf16_to_utf8(number_text(std::get<double>(v)));
    case 4: return "\"" + js::utf16_to_utf8(std::get<std::u16string>(v)) + "\"";
    default: return "object";
    }
}

struct SoundnessSweep {
    size_t generated = 0;
    size_t checked = 0;
    size_t out_of_fuel = 0;
    size_t unparsed = 0;
    size_t no_fixpoint = 0;
    size_t violations = 0;
    std::string first_violation;

    bool sound() const { return unparsed == 0 && no_fixpoint == 0 && violations == 0; }
};

// Runs `count` generated programs concretely and abstractly and checks that
// every tracked global's concrete value is contained in its abstraction.
inline SoundnessSweep check_soundness(size_t count, uint64_t seed, model::ModelEnvironment const& env)
{
    Generator gen(seed);
    SoundnessSweep out;
    auto namer = env.namer();
    for (size_t i = 0; i < count; ++i) {
        std::string source = gen.program();
        ++out.generated;
        auto parsed = js::parse_js_utf8(source);
        if (!parsed.ok()) {
            if (out.unparsed++ == 0 && out.first_violation.empty())
                out.first_violation = "unparsed:\n" + source;
            continue;
        }
        Concrete conc;
        try {
            conc.run(*parsed.program);
        } catch (OutOfFuel const&) {
            ++out.out_of_fuel;
            continue;
        }
        interp::Options options;
        options.function_handlers = false;
        auto result = interp::analyze({ interp::Script { parsed.program, "gen" } }, {}, env, {}, options);
        if (!result.fixpoint()) {
            if (out.no_fixpoint++ == 0 && out.first_violation.empty())
                out.first_violation = "no fixpoint:\n" + source;
            continue;
        }
        for (auto const* name : { u"a", u"b", u"c", u"d", u"o", u"arr" }) {
            Value const* v = conc.global(name);
            AbsValue abs = result.global_value(name);
            if (v && contained(*v, abs, conc, result.final_state, 2))
                continue;
            if (out.violations++ == 0)
                out.first_violation = js::utf16_to_utf8(name) + " concrete " + (v ? describe(*v) : "missing")
                    + " abstract " + domain::render(abs, &namer) + "\n" + source;
        }
        ++out.checked;
    }
    return out;
}

}
