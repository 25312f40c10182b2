// SPDX-License-Identifier: Apache-2.0
#include "safepdf/interp/interp.hpp"

#include "safepdf/domain/ops.hpp"
#include "safepdf/js/number.hpp"
#include "safepdf/model/builtins.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <unordered_map>

namespace safepdf::interp {

using domain::AbsBool;
using domain::AbsNumber;
using domain::AbsString;
using domain::AbstractObject;
using domain::AddressSpace;
using domain::ObjClass;
using domain::Primitive;
using js::Node;
using js::NodeKind;
using js::Op;

std::string_view not_reached_name(NotReached reason)
{
    switch (reason) {
    case NotReached::Timeout: return "Timeout";
    case NotReached::MemoryBudget: return "MemoryBudget";
    case NotReached::PrecisionAbort: return "PrecisionAbort";
    }
    return "Timeout";
}

bool State::leq(State const& other) const
{
    if (!live)
        return true;
    if (!other.live)
        return false;
    return heap.leq(other.heap);
}

State State::join(State const& other, size_t k) const
{
    if (!live)
        return other;
    if (!other.live)
        return *this;
    return State { true, heap.join(other.heap, k) };
}

State State::widen(State const& next, size_t k) const
{
    if (!live)
        return next;
    if (!next.live)
        return *this;
    return State { true, heap.widen(next.heap, k) };
}

bool State::operator==(State const& other) const
{
    return live == other.live && (!live || heap == other.heap);
}

AbsValue Outcome::global_value(std::u16string_view name) const
{
    auto const* obj = final_state.heap.get(global);
    if (!obj)
        return {};
    return domain::property_match(*obj, AbsString::constant(std::u16string(name))).value;
}

ParsedScripts parse_scripts(std::vector<std::pair<std::string, std::string>> const& named_sources, uint32_t first_site)
{
    ParsedScripts out;
    for (size_t i = 0; i < named_sources.size(); ++i) {
        auto result = js::parse_js_utf8(named_sources[i].second, js::ParserOptions { first_site });
        out.diagnostics.insert(out.diagnostics.end(), result.diagnostics.begin(), result.diagnostics.end());
        if (!result.ok()) {
            out.failed = i;
            break;
        }
        first_site = result.program->next_site;
        out.scripts.push_back(Script { result.program, named_sources[i].first });
    }
    return out;
}

namespace {

constexpr uint32_t catch_site_bit = 0x40000000;
constexpr uint32_t handler_context_bit = 0x20000000;

struct BudgetExhausted {
    NotReached reason;
};

struct FunctionInfo {
    Node const* node = nullptr; // null for a script's top level
    uint32_t script = 0;
    std::vector<std::u16string> vars;
    std::vector<Node const*> decls;
    bool uses_arguments = false;
    bool has_closures = false;
};

struct Flow {
    State normal;
    std::map<std::u16string, State> breaks;
    std::map<std::u16string, State> continues;
    State ret;
    AbsValue ret_value;
};

struct Frame {
    Address env;
    AbsValue this_value;
    uint32_t ctx = 0;
    uint32_t script = 0;
};

struct Activation {
    State pending;
    State exit;
    AbsValue ret;
    bool recursed = false;
};

struct Branch {
    State t;
    State f;
    AbsValue value;
};

template <class F>
void for_children(Node const& n, F&& f)
{
    for (auto const* child : { n.a.get(), n.b.get(), n.c.get(), n.d.get() })
        if (child)
            f(*child);
    for (auto const& item : n.items)
        if (item)
            f(*item);
}

bool is_function_node(Node const& n) { return n.kind == NodeKind::Function || n.kind == NodeKind::FunctionDecl; }

AbsValue without_nullish(AbsValue v)
{
    v.undef = false;
    v.null = false;
    return v;
}

AbsValue addresses_only(AbsValue const& v)
{
    AbsValue out;
    out.addrs = v.addrs;
    return out;
}

AbsValue primitive_part(AbsValue v)
{
    v.addrs.clear();
    return v;
}

AbsValue truthy_part(AbsValue v)
{
    v.undef = false;
    v.null = false;
    v.boolean = v.boolean.may_true() ? AbsBool::constant(true) : AbsBool::bottom();
    v.num = domain::filter_numbers(v.num, [](double d) { return !(d == 0 || std::isnan(d)); });
    v.str = domain::remove_string(v.str, u"");
    return v;
}

AbsValue falsy_part(AbsValue const& v)
{
    AbsValue r;
    r.undef = v.undef;
    r.null = v.null;
    if (v.boolean.may_false())
        r.boolean = AbsBool::constant(false);
    if (v.num.is_top())
        r.num = AbsNumber::of({ -0.0, 0.0, NAN });
    else
        r.num = domain::filter_numbers(v.num, [](double d) { return d == 0 || std::isnan(d); });
    if (v.str.contains(u""))
        r.str = AbsString::constant(u"");
    return r;
}

std::optional<std::vector<Primitive>> atoms(AbsValue const& v, size_t limit = 64)
{
    if (!v.addrs.empty() || (!v.str.is_set() && !v.str.is_bottom()) || v.num.is_top())
        return std::nullopt;
    std::vector<Primitive> out;
    if (v.undef)
        out.emplace_back(std::monostate {});
    if (v.null)
        out.emplace_back(nullptr);
    if (v.boolean.may_true())
        out.emplace_back(true);
    if (v.boolean.may_false())
        out.emplace_back(false);
    for (double d : v.num.values())
        out.emplace_back(d);
    for (auto const& s : v.str.values())
        out.emplace_back(s);
    if (out.size() > limit)
        return std::nullopt;
    return out;
}

double prim_number(Primitive const& p)
{
    switch (p.index()) {
    case 0: return NAN;
    case 1: return 0;
    case 2: return std::get<bool>(p) ? 1 : 0;
    case 3: return std::get<double>(p);
    default: return js::string_to_number(std::get<std::u16string>(p));
    }
}

// ES5 abstract relational comparison; nullopt is `undefined`.
std::optional<bool> concrete_less(Primitive const& a, Primitive const& b)
{
    if (a.index() == 4 && b.index() == 4)
        return std::get<std::u16string>(a) < std::get<std::u16string>(b);
    double x = prim_number(a), y = prim_number(b);
    if (std::isnan(x) || std::isnan(y))
        return std::nullopt;
    return x < y;
}

bool relational(Op op, Primitive const& a, Primitive const& b)
{
    switch (op) {
    case Op::Lt: return concrete_less(a, b).value_or(false);
    case Op::Gt: return concrete_less(b, a).value_or(false);
    case Op::Le: {
        auto r = concrete_less(b, a);
        return r && !*r;
    }
    case Op::Ge: {
        auto r = concrete_less(a, b);
        return r && !*r;
    }
    default: return false;
    }
}

double arith(Op op, double a, double b)
{
    switch (op) {
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::Mod: return std::fmod(a, b);
    case Op::Shl:
        return static_cast<double>(static_cast<int32_t>(static_cast<uint32_t>(js::to_int32(a)) << (js::to_uint32(b) & 31)));
    case Op::Shr: return static_cast<double>(js::to_int32(a) >> (js::to_uint32(b) & 31));
    case Op::UShr: return static_cast<double>(js::to_uint32(a) >> (js::to_uint32(b) & 31));
    case Op::BitAnd: return static_cast<double>(js::to_int32(a) & js::to_int32(b));
    case Op::BitOr: return static_cast<double>(js::to_int32(a) | js::to_int32(b));
    case Op::BitXor: return static_cast<double>(js::to_int32(a) ^ js::to_int32(b));
    default: return NAN;
    }
}

void join_into(State& dst, State const& src, size_t k) { dst = dst.join(src, k); }

class Analyzer final : public model::Host {
public:
    Analyzer(model::ModelEnvironment const& env, Budget const& budget, Options const& options)
        : env_(env), budget_(budget), opts_(options), k_(options.k)
    {
        deadline_ = std::chrono::steady_clock::now()
                    + std::chrono::microseconds(static_cast<int64_t>(budget.timeout_seconds * 1e6));
    }

    Outcome run(std::vector<Script> const& preamble, std::vector<Script> const& handlers)
    {
        Outcome out;
        out.global = env_.global;
        for (auto const& s : preamble)
            add_script(s);
        for (auto const& s : handlers)
            add_script(s);
        index_scripts();
        State state { true, *env_.heap };
        try {
            for (uint32_t i = 0; i < preamble.size(); ++i)
                state = run_script(i, state);
            state = drive(state, static_cast<uint32_t>(preamble.size()), out.rounds);
        } catch (BudgetExhausted const& e) {
            out.not_reached = e.reason;
        }
        out.final_state = std::move(state);
        out.log = std::move(log_);
        return out;
    }

    // ---- Host

    model::ModelEnvironment const& environment() const override { return env_; }
    size_t k() const override { return k_; }
    uint64_t string_cap() const override { return opts_.string_cap; }

    AbstractObject const* object(Address a) override { return cur_->heap.get(a); }
    AbstractObject& mutate(Address a) override { return cur_->heap.mutate(a); }

    Address allocate(ObjClass cls, std::string_view proto, uint32_t slot) override
    {
        Address a = Address::of(AddressSpace::Native, (cur_call_ << 2) | (slot & 3), frames_.back().ctx);
        AbstractObject obj;
        obj.cls = cls;
        if (auto p = env_.object(proto))
            obj.prototype = { *p };
        if (cls == ObjClass::Array)
            obj.internal_length = AbsNumber::constant(0);
        allocate_object(*cur_, a, std::move(obj));
        return a;
    }

    AbsValue get(AbsValue const& base, AbsString const& key) override
    {
        return get_property(base, key, *cur_, *cur_node_, nullptr);
    }

    void put(AbsValue const& base, AbsString const& key, AbsValue const& value) override
    {
        put_property(base, key, value, *cur_, *cur_node_);
    }

    AbsValue call(AbsValue const& callee, AbsValue const& this_value, std::vector<AbsValue> const& args) override
    {
        State* saved_state = cur_;
        Node const* saved_node = cur_node_;
        uint32_t saved_call = cur_call_;
        AbsValue r = call_value(callee, this_value, args, *saved_state, *saved_node, saved_call, false, false, false);
        cur_ = saved_state;
        cur_node_ = saved_node;
        cur_call_ = saved_call;
        return r;
    }

    void type_error(std::string_view) override { raise_type_error(*cur_, UnexpectedKind::TypeError, *cur_node_); }

    void log_api(model::ApiInfo const& api, std::vector<AbsValue> const& args) override
    {
        BehaviorEvent e;
        e.kind = EventKind::ApiCall;
        e.detail = api.path;
        e.safety = api.safety;
        e.args = args;
        event_at(std::move(e), *cur_node_);
        if (api.safety == model::Safety::EvalLike) {
            BehaviorEvent ev;
            ev.kind = EventKind::EvalLike;
            ev.detail = api.path;
            ev.args = { args.empty() ? AbsValue::undefined() : args[0] };
            event_at(std::move(ev), *cur_node_);
        }
    }

    void note_string(AbsString const& s) override { check_string(s, *cur_node_); }
    void note_array(Address a) override { check_object(*cur_, a, *cur_node_); }

private:
    model::ModelEnvironment const& env_;
    Budget budget_;
    Options opts_;
    size_t k_;
    std::chrono::steady_clock::time_point deadline_;
    BehaviorLog log_;

    std::vector<Script> scripts_;
    std::vector<FunctionInfo> tops_;
    std::vector<FunctionInfo> functions_;
    std::unordered_map<Node const*, uint32_t> fn_index_;
    std::unordered_map<Node const*, uint32_t> ids_;
    std::set<std::u16string> referenced_;
    uint32_t next_id_ = 1;

    std::vector<Frame> frames_;
    std::map<Address, Activation*> active_;
    size_t depth_ = 0;
    uint64_t steps_ = 0;

    // pending exceptions of the innermost try region
    State exc_state_;
    AbsValue exc_value_;
    std::optional<std::pair<uint32_t, js::Span>> exc_site_;
    int catching_ = 0;

    State* cur_ = nullptr;
    Node const* cur_node_ = nullptr;
    uint32_t cur_call_ = 0;

    // ---- preparation

    void add_script(Script const& script)
    {
        uint32_t index = static_cast<uint32_t>(scripts_.size());
        scripts_.push_back(script);
        FunctionInfo top;
        top.script = index;
        for (auto const& stmt : script.program->body)
            collect_scope(*stmt, top);
        tops_.push_back(std::move(top));
    }

    // Node ids follow the scripts' site ranges, so they do not depend on
    // the order handlers were passed in.
    void index_scripts()
    {
        std::vector<uint32_t> order(scripts_.size());
        for (uint32_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](uint32_t x, uint32_t y) {
            auto const& px = *scripts_[x].program;
            auto const& py = *scripts_[y].program;
            return std::tie(px.first_site, px.source) < std::tie(py.first_site, py.source);
        });
        for (uint32_t i : order)
            for (auto const& stmt : scripts_[i].program->body)
                index_nodes(*stmt, i);
    }

    void collect_scope(Node const& n, FunctionInfo& info)
    {
        switch (n.kind) {
        case NodeKind::FunctionDecl:
            info.decls.push_back(&n);
            info.vars.push_back(n.text);
            info.has_closures = true;
            return;
        case NodeKind::Function: info.has_closures = true; return;
        case NodeKind::Declarator: info.vars.push_back(n.text); break;
        case NodeKind::Identifier:
            if (n.text == u"arguments")
                info.uses_arguments = true;
            break;
        default: break;
        }
        for_children(n, [&](Node const& c) { collect_scope(c, info); });
    }

    void index_nodes(Node const& n, uint32_t script)
    {
        ids_.emplace(&n, next_id_++);
        switch (n.kind) {
        case NodeKind::Identifier:
        case NodeKind::Member:
        case NodeKind::String: referenced_.insert(n.text); break;
        default: break;
        }
        if (is_function_node(n)) {
            FunctionInfo info;
            info.node = &n;
            info.script = script;
            for (auto const& stmt : n.items)
                collect_scope(*stmt, info);
            fn_index_.emplace(&n, static_cast<uint32_t>(functions_.size()));
            functions_.push_back(std::move(info));
        }
        for_children(n, [&](Node const& c) { index_nodes(c, script); });
    }

    uint32_t id_of(Node const& n) const
    {
        auto it = ids_.find(&n);
        return it == ids_.end() ? 0 : it->second;
    }

    // ---- budget and logging

    void tick(State const& s)
    {
        ++steps_;
        if ((steps_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_)
            throw BudgetExhausted { NotReached::Timeout };
        if ((steps_ & 1023) == 0 && s.live) {
            if (s.heap.size() > budget_.max_objects)
                throw BudgetExhausted { NotReached::MemoryBudget };
            if (s.heap.property_count() > budget_.max_properties)
                throw BudgetExhausted { NotReached::PrecisionAbort };
        }
    }

    void event_at(BehaviorEvent e, Node const& at)
    {
        e.script = frames_.empty() ? 0 : frames_.back().script;
        e.span = at.span;
        log_.add(std::move(e), k_);
    }

    void unexpected(UnexpectedKind kind, Node const& at)
    {
        BehaviorEvent e;
        e.kind = EventKind::UnexpectedBehavior;
        e.detail = std::string(unexpected_kind_name(kind));
        event_at(std::move(e), at);
    }

    void check_string(AbsString const& s, Node const& at)
    {
        if (s.is_bottom())
            return;
        uint64_t size = s.length_bound();
        if (s.is_set())
            for (auto const& v : s.values())
                size = std::max<uint64_t>(size, v.size());
        if (size > opts_.large_string_floor) {
            BehaviorEvent e;
            e.kind = EventKind::LargeString;
            e.size = size;
            event_at(std::move(e), at);
        }
    }

    void check_object(State const& s, Address a, Node const& at)
    {
        auto const* obj = s.heap.get(a);
        if (!obj)
            return;
        uint64_t size = obj->property_count();
        if (obj->cls == ObjClass::Array) {
            AbsNumber const& len = obj->internal_length;
            if (len.is_top())
                size = domain::unbounded_length;
            else if (len.is_set() && !len.values().empty()) {
                double longest = *std::prev(len.values().end());
                if (!std::isnan(longest))
                    size = std::max<uint64_t>(size, static_cast<uint64_t>(std::min(longest, 1e18)));
            }
        }
        if (size > opts_.large_object_floor) {
            BehaviorEvent e;
            e.kind = EventKind::LargeObject;
            e.size = size;
            event_at(std::move(e), at);
        }
    }

    // ---- exceptions

    Address error_address() const { return Address::of(AddressSpace::Native, 0, 0); }

    void raise(State s, AbsValue const& value, Node const& at)
    {
        if (!s.live)
            return;
        exc_state_ = exc_state_.join(s, k_);
        exc_value_ = exc_value_.join(value, k_);
        if (!exc_site_)
            exc_site_ = { frames_.back().script, at.span };
    }

    void raise_type_error(State const& s, UnexpectedKind kind, Node const& at)
    {
        if (!s.live)
            return;
        if (catching_ == 0)
            unexpected(kind, at);
        State copy = s;
        Address a = error_address();
        if (!copy.heap.contains(a)) {
            AbstractObject err;
            err.cls = ObjClass::Error;
            err.summary = true;
            if (auto p = env_.object("Error.prototype"))
                err.prototype = { *p };
            err.properties[u"name"] = { AbsValue::string(AbsString::of({ u"ReferenceError", u"TypeError" })), true };
            err.properties[u"message"] = { AbsValue::string(AbsString::top()), true };
            copy.heap.put(a, std::move(err));
        }
        raise(std::move(copy), AbsValue::address(a), at);
    }

    // ---- heap helpers

    void allocate_object(State& s, Address a, AbstractObject obj)
    {
        if (auto const* old = s.heap.get(a)) {
            obj = old->join(obj, k_);
            obj.summary = true;
        }
        s.heap.put(a, std::move(obj));
        if (s.heap.size() > budget_.max_objects)
            throw BudgetExhausted { NotReached::MemoryBudget };
    }

    std::set<Address> proto_of(std::string_view path) const
    {
        auto p = env_.object(path);
        return p ? std::set<Address> { *p } : std::set<Address> {};
    }

    // Lookup along prototype chains; `absent` when some chain ends without it.
    std::pair<AbsValue, bool> chain_lookup(std::set<Address> const& start, AbsString const& key, State const& s) const
    {
        AbsValue value;
        bool absent = false;
        std::vector<Address> work(start.begin(), start.end());
        std::set<Address> seen;
        while (!work.empty()) {
            Address a = work.back();
            work.pop_back();
            if (!seen.insert(a).second)
                continue;
            auto const* obj = s.heap.get(a);
            if (!obj) {
                absent = true;
                continue;
            }
            auto m = domain::property_match(*obj, key, k_);
            value = value.join(m.value, k_);
            if (m.may_be_absent) {
                if (obj->prototype.empty())
                    absent = true;
                else
                    work.insert(work.end(), obj->prototype.begin(), obj->prototype.end());
            }
        }
        return { value, absent };
    }

    struct GetInfo {
        bool unknown_model = false;
    };

    AbsValue string_property(AbsString const& str, AbsString const& key, State const& s)
    {
        AbsValue out;
        auto proto = [&](AbsString const& k) {
            auto [v, absent] = chain_lookup(proto_of("String.prototype"), k, s);
            out = out.join(v, k_);
            if (absent)
                out = out.join(AbsValue::undefined(), k_);
        };
        auto chars = [&](std::optional<uint32_t> index) {
            if (str.is_set() && index) {
                AbsValue r;
                for (auto const& v : str.values())
                    r = r.join(*index < v.size() ? AbsValue::string(v.substr(*index, 1)) : AbsValue::undefined(), k_);
                out = out.join(r, k_);
            } else {
                out = out.join(AbsValue::string(AbsString::top()), k_).join(AbsValue::undefined(), k_);
            }
        };
        if (key.is_set()) {
            for (auto const& name : key.values()) {
                if (name == u"length")
                    out = out.join(AbsValue::number(domain::string_lengths(str, k_)), k_);
                else if (auto index = domain::array_index(name))
                    chars(index);
                else
                    proto(AbsString::constant(name));
            }
            return out;
        }
        if (key.kind() != AbsString::Kind::NumberStr)
            out = out.join(AbsValue::number(domain::string_lengths(str, k_)), k_);
        if (key.kind() != AbsString::Kind::NotNumberStr)
            chars(std::nullopt);
        proto(key);
        return out;
    }

    AbsValue get_property(AbsValue const& base, AbsString const& key, State& s, Node const& at, GetInfo* info)
    {
        if (!s.live)
            return {};
        AbsValue out;
        if (base.undef || base.null) {
            raise_type_error(s, UnexpectedKind::PropertyOfUndefined, at);
            if (without_nullish(base).is_bottom()) {
                s.live = false;
                return {};
            }
        }
        if (!base.str.is_bottom())
            out = out.join(string_property(base.str, key, s), k_);
        auto primitive_proto = [&](std::string_view path) {
            auto [v, absent] = chain_lookup(proto_of(path), key, s);
            out = out.join(v, k_);
            if (absent)
                out = out.join(AbsValue::undefined(), k_);
        };
        if (!base.num.is_bottom())
            primitive_proto("Number.prototype");
        if (!base.boolean.is_bottom())
            primitive_proto("Boolean.prototype");
        for (Address a : base.addrs) {
            auto [v, absent] = chain_lookup({ a }, key, s);
            out = out.join(v, k_);
            if (absent) {
                out = out.join(AbsValue::undefined(), k_);
                if (info && a.space == AddressSpace::Model)
                    info->unknown_model = true;
            }
        }
        return out;
    }

    void put_property(AbsValue const& base, AbsString const& key, AbsValue const& value, State& s, Node const& at)
    {
        if (!s.live)
            return;
        if (base.undef || base.null) {
            raise_type_error(s, UnexpectedKind::PropertyOfUndefined, at);
            if (without_nullish(base).is_bottom()) {
                s.live = false;
                return;
            }
        }
        bool strong = base.addrs.size() == 1;
        for (Address a : base.addrs) {
            AbstractObject& obj = s.heap.mutate(a);
            domain::write_property(obj, key, value, strong, k_);
            if (obj.cls == ObjClass::Array || obj.property_count() > opts_.large_object_floor)
                check_object(s, a, at);
        }
    }

    // ---- scopes

    struct Resolution {
        AbsValue value;
        bool maybe_missing = false;
        std::vector<std::pair<Address, bool>> holders; // (object, definitely holds it)
    };

    Resolution resolve(std::u16string const& name, State const& s) const
    {
        Resolution r;
        AbsString key = AbsString::constant(name);
        std::vector<Address> work { frames_.back().env };
        std::set<Address> seen;
        while (!work.empty()) {
            Address a = work.back();
            work.pop_back();
            if (!seen.insert(a).second)
                continue;
            auto const* obj = s.heap.get(a);
            if (!obj) {
                r.maybe_missing = true;
                continue;
            }
            bool absent;
            if (obj->cls == ObjClass::Environment) {
                auto m = domain::property_match(*obj, key, k_);
                if (!m.value.is_bottom() || !m.may_be_absent)
                    r.holders.push_back({ a, !m.may_be_absent });
                r.value = r.value.join(m.value, k_);
                absent = m.may_be_absent;
            } else {
                // object environment: the document and its prototypes
                auto own = domain::property_match(*obj, key, k_);
                if (!own.value.is_bottom() || !own.may_be_absent)
                    r.holders.push_back({ a, !own.may_be_absent });
                auto [v, chain_absent] = chain_lookup({ a }, key, s);
                r.value = r.value.join(v, k_);
                absent = chain_absent;
            }
            if (absent) {
                if (obj->scope.empty())
                    r.maybe_missing = true;
                else
                    work.insert(work.end(), obj->scope.begin(), obj->scope.end());
            }
        }
        return r;
    }

    AbsValue read_name(std::u16string const& name, State& s, Node const& at)
    {
        Resolution r = resolve(name, s);
        if (r.maybe_missing) {
            raise_type_error(s, UnexpectedKind::UndeclaredVariable, at);
            if (r.value.is_bottom())
                s.live = false;
        }
        return r.value;
    }

    void write_name(std::u16string const& name, AbsValue const& value, State& s)
    {
        if (!s.live)
            return;
        Resolution r = resolve(name, s);
        auto targets = r.holders;
        if (r.maybe_missing || targets.empty())
            targets.push_back({ env_.global, false });
        bool strong = targets.size() == 1 && (targets[0].second || r.holders.empty());
        AbsString key = AbsString::constant(name);
        for (auto const& [a, definite] : targets)
            domain::write_property(s.heap.mutate(a), key, value, strong, k_);
    }

    // Narrows a variable bound in exactly one place.
    void refine_name(std::u16string const& name, AbsValue const& value, State& s)
    {
        if (!s.live)
            return;
        if (value.is_bottom()) {
            s.live = false;
            return;
        }
        Resolution r = resolve(name, s);
        if (r.maybe_missing || r.holders.size() != 1 || !r.holders[0].second)
            return;
        auto const* obj = s.heap.get(r.holders[0].first);
        if (!obj || obj->summary || obj->cls != ObjClass::Environment)
            return;
        domain::write_property(s.heap.mutate(r.holders[0].first), AbsString::constant(name), value, true, k_);
    }

    // ---- functions

    Address make_function(Node const& fn, State& s)
    {
        Frame const& f = frames_.back();
        Address a = Address::program(fn.site, f.ctx);
        Address proto = Address::of(AddressSpace::Proto, fn.site, f.ctx);
        AbstractObject obj;
        obj.cls = ObjClass::Function;
        obj.code = fn_index_.at(&fn);
        obj.scope = { f.env };
        obj.prototype = proto_of("Function.prototype");
        obj.properties[u"length"] = { AbsValue::number(static_cast<double>(fn.params.size())), true };
        obj.properties[u"prototype"] = { AbsValue::address(proto), true };
        AbstractObject p;
        p.prototype = proto_of("Object.prototype");
        p.properties[u"constructor"] = { AbsValue::address(a), true };
        allocate_object(s, a, std::move(obj));
        allocate_object(s, proto, std::move(p));
        return a;
    }

    void hoist_top(FunctionInfo const& info, State& s)
    {
        AbstractObject& global = s.heap.mutate(env_.global);
        for (auto const& name : info.vars) {
            auto it = global.properties.find(name);
            if (it == global.properties.end())
                global.properties[name] = { AbsValue::undefined(), true };
            else if (!it->second.definite)
                it->second = { it->second.value.join(AbsValue::undefined(), k_), true };
        }
        for (Node const* decl : info.decls) {
            Address fn = make_function(*decl, s);
            domain::write_property(s.heap.mutate(env_.global), AbsString::constant(decl->text), AbsValue::address(fn),
                                   true, k_);
        }
    }

    void bind_entry(State& s, FunctionInfo const& fi, Address env_addr, Address callee, AbstractObject const& fn_obj,
                    std::vector<AbsValue> const& args, uint32_t call_id)
    {
        AbstractObject env;
        env.cls = ObjClass::Environment;
        env.scope = fn_obj.scope;
        Node const& fn = *fi.node;
        for (size_t i = 0; i < fn.params.size(); ++i)
            env.properties[fn.params[i]] = { i < args.size() ? args[i] : AbsValue::undefined(), true };
        for (auto const& name : fi.vars)
            env.properties.emplace(name, domain::Property { AbsValue::undefined(), true });
        if (fn.kind == NodeKind::Function && !fn.text.empty())
            env.properties.emplace(fn.text, domain::Property { AbsValue::address(callee), true });
        if (fi.uses_arguments && !env.properties.count(u"arguments")) {
            Address args_addr = Address::of(AddressSpace::Args, fn.site, call_id);
            AbstractObject ao;
            ao.cls = ObjClass::Arguments;
            ao.prototype = proto_of("Object.prototype");
            for (size_t i = 0; i < args.size(); ++i)
                ao.properties[js::number_to_u16string(static_cast<double>(i))] = { args[i], true };
            ao.properties[u"length"] = { AbsValue::number(static_cast<double>(args.size())), true };
            ao.properties[u"callee"] = { AbsValue::address(callee), true };
            allocate_object(s, args_addr, std::move(ao));
            env.properties[u"arguments"] = { AbsValue::address(args_addr), true };
        }
        if (auto const* old = s.heap.get(env_addr); old && fi.has_closures) {
            env = old->join(env, k_);
            env.summary = true;
        }
        s.heap.put(env_addr, std::move(env));
        // inner declarations live in the new activation
        frames_.push_back(Frame { env_addr, AbsValue::undefined(), call_id, fi.script });
        for (Node const* decl : fi.decls) {
            Address a = make_function(*decl, s);
            domain::write_property(s.heap.mutate(env_addr), AbsString::constant(decl->text), AbsValue::address(a),
                                   true, k_);
        }
        frames_.pop_back();
    }

    AbsValue call_user(Address callee, AbstractObject const& fn_obj, AbsValue const& this_in,
                       std::vector<AbsValue> const& args, State& s, Node const& at, uint32_t call_id, bool construct)
    {
        FunctionInfo const& fi = functions_.at(fn_obj.code);
        Address env_addr = Address::of(AddressSpace::Scope, fi.node->site, call_id);

        AbsValue this_value = this_in;
        Address constructed {};
        if (construct) {
            constructed = Address::program(at.site, frames_.back().ctx);
            AbstractObject obj;
            auto proto = domain::property_match(fn_obj, AbsString::constant(u"prototype"), k_).value;
            obj.prototype = proto.addrs.empty() ? proto_of("Object.prototype") : proto.addrs;
            allocate_object(s, constructed, std::move(obj));
            this_value = AbsValue::address(constructed);
        } else if (this_value.undef || this_value.null || this_value.is_bottom()) {
            // A call without a receiver sees the same `this` as top-level code.
            this_value = without_nullish(this_value).join(AbsValue::address(env_.doc), k_);
        }

        if (auto it = active_.find(env_addr); it != active_.end()) {
            Activation& act = *it->second;
            act.recursed = true;
            State entry = s;
            bind_entry(entry, fi, env_addr, callee, fn_obj, args, call_id);
            act.pending = act.pending.join(entry, k_);
            s = act.exit.live ? s.join(act.exit, k_) : State {};
            return act.ret;
        }
        if (depth_ >= opts_.max_call_depth) {
            unexpected(UnexpectedKind::Recursion, at);
            return AbsValue::top_primitive();
        }

        Activation act;
        active_[env_addr] = &act;
        State entry = s;
        bind_entry(entry, fi, env_addr, callee, fn_obj, args, call_id);
        State exit;
        AbsValue ret;
        for (size_t iteration = 0;; ++iteration) {
            act.recursed = false;
            act.pending = State {};
            frames_.push_back(Frame { env_addr, this_value, call_id, fi.script });
            ++depth_;
            Flow fl;
            try {
                fl = exec_list(fi.node->items, entry);
            } catch (...) {
                --depth_;
                frames_.pop_back();
                active_.erase(env_addr);
                throw;
            }
            --depth_;
            frames_.pop_back();
            exit = fl.normal.join(fl.ret, k_);
            ret = fl.ret_value;
            if (fl.normal.live)
                ret = ret.join(AbsValue::undefined(), k_);
            if (!act.recursed)
                break;
            bool stable = act.pending.leq(entry) && exit.leq(act.exit) && ret.leq(act.ret);
            if (stable)
                break;
            State next_entry = entry.join(act.pending, k_);
            if (iteration < k_) {
                entry = next_entry;
                act.exit = act.exit.join(exit, k_);
                act.ret = act.ret.join(ret, k_);
            } else {
                entry = entry.widen(next_entry, k_);
                act.exit = act.exit.widen(exit, k_);
                act.ret = act.ret.widen(ret, k_);
            }
            tick(entry);
        }
        active_.erase(env_addr);
        s = exit;
        if (construct) {
            AbsValue result;
            result.addrs = ret.addrs;
            if (ret.has_primitive() || ret.is_bottom())
                result = result.join(AbsValue::address(constructed), k_);
            return s.live ? result : AbsValue {};
        }
        return s.live ? ret : AbsValue {};
    }

    bool has_user_conversion(Address a, State const& s) const
    {
        for (auto const* name : { u"valueOf", u"toString" }) {
            auto [v, absent] = chain_lookup({ a }, AbsString::constant(name), s);
            for (Address f : v.addrs)
                if (auto const* obj = s.heap.get(f); obj && obj->cls == ObjClass::Function)
                    return true;
        }
        return false;
    }

    AbsValue call_builtin(AbstractObject const& fn_obj, AbsValue const& this_value, std::vector<AbsValue> const& args,
                          State& s, Node const& at, uint32_t call_id, bool construct)
    {
        // user-defined conversions run when the model coerces its arguments
        for (auto const& arg : args)
            for (Address a : arg.addrs)
                if (has_user_conversion(a, s))
                    (void)object_to_primitive(a, s, at);
        if (!s.live)
            return {};
        model::ApiInfo const& api = env_.apis.at(fn_obj.code);
        State* saved_state = cur_;
        Node const* saved_node = cur_node_;
        uint32_t saved_call = cur_call_;
        cur_ = &s;
        cur_node_ = &at;
        cur_call_ = call_id;
        AbsValue r = model::dispatch_api(api, *this, this_value, args, construct);
        cur_ = saved_state;
        cur_node_ = saved_node;
        cur_call_ = saved_call;
        return r;
    }

    AbsValue call_value(AbsValue const& callee, AbsValue const& this_value, std::vector<AbsValue> const& args,
                        State& s, Node const& at, uint32_t call_id, bool construct, bool unknown_model,
                        bool unknown_callee)
    {
        if (!s.live)
            return {};
        bool non_callable = callee.has_primitive();
        std::vector<std::pair<Address, AbstractObject const*>> targets;
        for (Address a : callee.addrs) {
            auto const* obj = s.heap.get(a);
            if (obj && (obj->cls == ObjClass::Function || obj->cls == ObjClass::Builtin))
                targets.push_back({ a, obj });
            else
                non_callable = true;
        }
        if (unknown_callee && !targets.empty()) {
            BehaviorEvent e;
            e.kind = EventKind::UnknownCallee;
            event_at(std::move(e), at);
        }
        if (non_callable || callee.is_bottom()) {
            if (!callee.is_bottom())
                raise_type_error(s, unknown_model ? UnexpectedKind::UnknownApi : UnexpectedKind::CallOfNonFunction,
                                 at);
        }
        AbsValue result;
        State out;
        for (auto const& [a, obj_ptr] : targets) {
            State si = targets.size() == 1 ? std::move(s) : s;
            AbstractObject fn_obj = *obj_ptr;
            AbsValue r = fn_obj.cls == ObjClass::Function
                             ? call_user(a, fn_obj, this_value, args, si, at, call_id, construct)
                             : call_builtin(fn_obj, this_value, args, si, at, call_id, construct);
            result = result.join(r, k_);
            out = out.join(si, k_);
        }
        s = std::move(out);
        return s.live ? result : AbsValue {};
    }

    // ---- conversions

    AbsValue object_to_primitive(Address a, State& s, Node const& at)
    {
        auto const* obj = s.heap.get(a);
        bool date = obj && obj->cls == ObjClass::Date;
        std::array<char16_t const*, 2> order { u"valueOf", u"toString" };
        if (date)
            std::swap(order[0], order[1]);
        AbsValue acc;
        bool need_next = true;
        for (auto const* name : order) {
            if (!need_next || !s.live)
                break;
            need_next = false;
            auto [fn, absent] = chain_lookup({ a }, AbsString::constant(name), s);
            AbsValue callable;
            for (Address f : fn.addrs)
                if (auto const* fo = s.heap.get(f); fo && (fo->cls == ObjClass::Function || fo->cls == ObjClass::Builtin))
                    callable.addrs.insert(f);
            if (absent || callable.addrs.size() != fn.addrs.size() || fn.has_primitive())
                need_next = true;
            if (callable.addrs.empty())
                continue;
            State si = s;
            AbsValue r = call_value(callable, AbsValue::address(a), {}, si, at, id_of(at), false, false, false);
            s = si;
            acc = acc.join(primitive_part(r), k_);
            if (!r.addrs.empty())
                need_next = true;
        }
        if (need_next && acc.is_bottom())
            raise_type_error(s, UnexpectedKind::TypeError, at);
        return acc;
    }

    AbsValue to_primitive(AbsValue const& v, State& s, Node const& at)
    {
        if (v.addrs.empty())
            return v;
        AbsValue out = primitive_part(v);
        for (Address a : v.addrs)
            out = out.join(object_to_primitive(a, s, at), k_);
        return out;
    }

    // ---- operators

    AbsValue add(AbsValue const& l_in, AbsValue const& r_in, State& s, Node const& at)
    {
        AbsValue l = to_primitive(l_in, s, at);
        AbsValue r = to_primitive(r_in, s, at);
        AbsValue out;
        AbsValue lo = l, ro = r;
        lo.str = AbsString::bottom();
        ro.str = AbsString::bottom();
        AbsString str;
        if (!l.str.is_bottom() && !r.is_bottom())
            str = str.join(domain::concat(l.str, domain::to_string(r, k_), k_, opts_.string_cap), k_);
        if (!r.str.is_bottom() && !lo.is_bottom())
            str = str.join(domain::concat(domain::to_string(lo, k_), r.str, k_, opts_.string_cap), k_);
        if (!str.is_bottom()) {
            out.str = str;
            check_string(str, at);
        }
        if (!lo.is_bottom() && !ro.is_bottom())
            out.num = domain::map_numbers(domain::to_number(lo, k_), domain::to_number(ro, k_),
                                          [](double a, double b) { return a + b; }, k_);
        return out;
    }

    AbsValue compare(Op op, AbsValue const& l_in, AbsValue const& r_in, State& s, Node const& at)
    {
        AbsValue l = to_primitive(l_in, s, at);
        AbsValue r = to_primitive(r_in, s, at);
        if (l.is_bottom() || r.is_bottom())
            return {};
        auto la = atoms(l), ra = atoms(r);
        if (la && ra && la->size() * ra->size() <= 512) {
            AbsBool out;
            for (auto const& x : *la)
                for (auto const& y : *ra)
                    out = out.join(AbsBool::constant(relational(op, x, y)));
            return AbsValue::boolean_value(out);
        }
        return AbsValue::boolean_value(AbsBool::top());
    }

    static bool type_overlap(AbsValue const& a, AbsValue const& b)
    {
        return (!a.str.is_bottom() && !b.str.is_bottom()) || (!a.num.is_bottom() && !b.num.is_bottom())
            || (!a.boolean.is_bottom() && !b.boolean.is_bottom()) || (a.undef && b.undef) || (a.null && b.null);
    }

    static unsigned type_mask(AbsValue const& v)
    {
        return (v.str.is_bottom() ? 0u : 1u) | (v.num.is_bottom() ? 0u : 2u) | (v.boolean.is_bottom() ? 0u : 4u)
             | (v.undef ? 8u : 0u) | (v.null ? 16u : 0u);
    }

    static AbsValue type_slice(AbsValue const& v, unsigned bit)
    {
        AbsValue out;
        switch (bit) {
        case 1: out.str = v.str; break;
        case 2: out.num = v.num; break;
        case 4: out.boolean = v.boolean; break;
        case 8: out.undef = v.undef; break;
        default: out.null = v.null; break;
        }
        return out;
    }

    // Strict equality of primitive values, compared type by type.
    AbsBool strict_primitive(AbsValue const& l, AbsValue const& r)
    {
        unsigned lm = type_mask(l), rm = type_mask(r);
        AbsBool out;
        // some pair of differing types is possible
        if (lm && rm && !(lm == rm && __builtin_popcount(lm) == 1))
            out = out.join(AbsBool::constant(false));
        for (unsigned bit = 1; bit <= 16; bit <<= 1) {
            if (!(lm & rm & bit))
                continue;
            auto a = atoms(type_slice(l, bit)), b = atoms(type_slice(r, bit));
            if (a && b && a->size() * b->size() <= 512) {
                for (auto const& x : *a)
                    for (auto const& y : *b)
                        out = out.join(AbsBool::constant(domain::strict_equals(x, y)));
            } else {
                out = AbsBool::top();
            }
        }
        return out;
    }

    AbsValue equality(Op op, AbsValue const& l_in, AbsValue const& r_in, State& s, Node const& at)
    {
        bool strict = op == Op::StrictEq || op == Op::StrictNe;
        bool negate = op == Op::Ne || op == Op::StrictNe;
        AbsValue l = l_in, r = r_in;
        if (l.is_bottom() || r.is_bottom())
            return {};
        AbsBool out;
        if (!l.addrs.empty() && !r.addrs.empty()) {
            bool overlap = std::any_of(l.addrs.begin(), l.addrs.end(), [&](Address a) { return r.addrs.count(a) > 0; });
            out = out.join(overlap ? AbsBool::top() : AbsBool::constant(false));
            if (l.addrs.size() > 1 || r.addrs.size() > 1)
                out = out.join(AbsBool::constant(false));
        }
        AbsValue lp = primitive_part(l), rp = primitive_part(r);
        auto object_vs_primitive = [&](AbsValue const& objects, AbsValue const& prims, bool object_left) {
            if (objects.addrs.empty() || prims.is_bottom())
                return;
            if (strict || (without_nullish(prims).is_bottom())) {
                out = out.join(AbsBool::constant(false));
                return;
            }
            if (prims.undef || prims.null)
                out = out.join(AbsBool::constant(false));
            AbsValue converted = to_primitive(addresses_only(objects), s, at);
            AbsValue others = without_nullish(prims);
            auto a = atoms(converted), b = atoms(others);
            if (a && b && a->size() * b->size() <= 512) {
                for (auto const& x : *a)
                    for (auto const& y : *b)
                        out = out.join(AbsBool::constant(object_left ? domain::loose_equals(x, y)
                                                                     : domain::loose_equals(y, x)));
            } else {
                out = AbsBool::top();
            }
        };
        object_vs_primitive(l, rp, true);
        object_vs_primitive(r, lp, false);
        if (!lp.is_bottom() && !rp.is_bottom()) {
            if (strict) {
                out = out.join(strict_primitive(lp, rp));
            } else {
                auto a = atoms(lp), b = atoms(rp);
                if (a && b && a->size() * b->size() <= 512) {
                    for (auto const& x : *a)
                        for (auto const& y : *b)
                            out = out.join(AbsBool::constant(domain::loose_equals(x, y)));
                } else {
                    out = AbsBool::top();
                }
            }
        }
        if (negate) {
            AbsBool flipped;
            if (out.may_true())
                flipped = flipped.join(AbsBool::constant(false));
            if (out.may_false())
                flipped = flipped.join(AbsBool::constant(true));
            out = flipped;
        }
        return AbsValue::boolean_value(out);
    }

    AbsValue binary(Op op, AbsValue const& l, AbsValue const& r, State& s, Node const& at)
    {
        if (l.is_bottom() || r.is_bottom() || !s.live)
            return {};
        switch (op) {
        case Op::Add: return add(l, r, s, at);
        case Op::Lt:
        case Op::Gt:
        case Op::Le:
        case Op::Ge: return compare(op, l, r, s, at);
        case Op::Eq:
        case Op::Ne:
        case Op::StrictEq:
        case Op::StrictNe: return equality(op, l, r, s, at);
        case Op::In:
        case Op::Instanceof: return AbsValue::boolean_value(AbsBool::top());
        default: {
            AbsNumber a = domain::to_number(to_primitive(l, s, at), k_);
            AbsNumber b = domain::to_number(to_primitive(r, s, at), k_);
            return AbsValue::number(domain::map_numbers(a, b, [op](double x, double y) { return arith(op, x, y); }, k_));
        }
        }
    }

    AbsValue type_of(AbsValue const& v, State const& s)
    {
        std::set<std::u16string> names;
        if (v.undef)
            names.insert(u"undefined");
        if (v.null)
            names.insert(u"object");
        if (!v.boolean.is_bottom())
            names.insert(u"boolean");
        if (!v.num.is_bottom())
            names.insert(u"number");
        if (!v.str.is_bottom())
            names.insert(u"string");
        for (Address a : v.addrs) {
            auto const* obj = s.heap.get(a);
            bool fn = obj && (obj->cls == ObjClass::Function || obj->cls == ObjClass::Builtin);
            names.insert(fn ? u"function" : u"object");
        }
        return AbsValue::string(AbsString::of(std::move(names), 16));
    }

    // ---- references

    struct Ref {
        bool name = true;
        std::u16string id;
        AbsValue base;
        AbsString key;
    };

    Ref eval_ref(Node const& target, State& s)
    {
        Ref r;
        switch (target.kind) {
        case NodeKind::Identifier: r.id = target.text; break;
        case NodeKind::Member:
            r.name = false;
            r.base = eval(*target.a, s);
            r.key = AbsString::constant(target.text);
            break;
        case NodeKind::Index: {
            r.name = false;
            r.base = eval(*target.a, s);
            AbsValue key = eval(*target.b, s);
            r.key = domain::to_property_key(to_primitive(key, s, target), k_);
            break;
        }
        default:
            // invalid target: evaluate for effects
            eval(target, s);
            r.name = false;
            break;
        }
        return r;
    }

    AbsValue read_ref(Ref const& r, State& s, Node const& at)
    {
        if (r.name)
            return read_name(r.id, s, at);
        return get_property(r.base, r.key, s, at, nullptr);
    }

    void write_ref(Ref const& r, AbsValue const& v, State& s, Node const& at)
    {
        if (!s.live)
            return;
        if (r.name)
            write_name(r.id, v, s);
        else if (!r.key.is_bottom())
            put_property(r.base, r.key, v, s, at);
    }

    // ---- expressions

    std::vector<AbsValue> eval_args(Node const& call, State& s)
    {
        std::vector<AbsValue> args;
        for (auto const& a : call.items)
            args.push_back(eval(*a, s));
        return args;
    }

    AbsValue eval_call(Node const& n, State& s, bool construct)
    {
        Node const& callee = *n.a;
        AbsValue fn, this_value = AbsValue::undefined();
        GetInfo info;
        bool unknown_callee = false;
        if (!construct && (callee.kind == NodeKind::Member || callee.kind == NodeKind::Index)) {
            AbsValue base = eval(*callee.a, s);
            AbsString key;
            if (callee.kind == NodeKind::Member) {
                key = AbsString::constant(callee.text);
            } else {
                key = domain::to_property_key(to_primitive(eval(*callee.b, s), s, callee), k_);
                unknown_callee = !key.is_set();
            }
            fn = get_property(base, key, s, callee, &info);
            this_value = base;
        } else {
            fn = eval(callee, s);
        }
        std::vector<AbsValue> args = eval_args(n, s);
        if (!s.live)
            return {};
        return call_value(fn, this_value, args, s, n, id_of(n), construct, info.unknown_model, unknown_callee);
    }

    AbsValue eval(Node const& n, State& s)
    {
        if (!s.live)
            return {};
        switch (n.kind) {
        case NodeKind::Identifier:
            if (n.text == u"undefined") {
                Resolution r = resolve(n.text, s);
                if (!r.maybe_missing)
                    return r.value;
            }
            return read_name(n.text, s, n);
        case NodeKind::Number: return AbsValue::number(n.number);
        case NodeKind::String: {
            AbsValue v = AbsValue::string(n.text);
            check_string(v.str, n);
            return v;
        }
        case NodeKind::Boolean: return AbsValue::boolean_value(n.flag);
        case NodeKind::Null: return AbsValue::null_value();
        case NodeKind::This: return frames_.back().this_value;
        case NodeKind::Regex: {
            Address a = Address::program(n.site, frames_.back().ctx);
            AbstractObject obj;
            obj.cls = ObjClass::Regex;
            obj.prototype = proto_of("RegExp.prototype");
            obj.properties[u"source"] = { AbsValue::string(n.text), true };
            obj.properties[u"global"] = { AbsValue::boolean_value(n.extra.find(u'g') != std::u16string::npos), true };
            obj.properties[u"lastIndex"] = { AbsValue::number(0.0), true };
            allocate_object(s, a, std::move(obj));
            return AbsValue::address(a);
        }
        case NodeKind::Array: {
            std::vector<std::optional<AbsValue>> items;
            for (auto const& item : n.items)
                items.push_back(item ? std::optional<AbsValue>(eval(*item, s)) : std::nullopt);
            if (!s.live)
                return {};
            Address a = Address::program(n.site, frames_.back().ctx);
            AbstractObject obj;
            obj.cls = ObjClass::Array;
            obj.prototype = proto_of("Array.prototype");
            for (size_t i = 0; i < items.size(); ++i)
                if (items[i])
                    obj.properties[js::number_to_u16string(static_cast<double>(i))] = { *items[i], true };
            obj.internal_length = AbsNumber::constant(static_cast<double>(items.size()));
            allocate_object(s, a, std::move(obj));
            check_object(s, a, n);
            return AbsValue::address(a);
        }
        case NodeKind::Object: {
            std::vector<std::pair<std::u16string, AbsValue>> props;
            for (auto const& p : n.items) {
                if (p->op == Op::Get || p->op == Op::Set) {
                    unexpected(UnexpectedKind::Accessor, *p);
                    props.push_back({ p->text, AbsValue::top_primitive() });
                    continue;
                }
                props.push_back({ p->text, eval(*p->a, s) });
            }
            if (!s.live)
                return {};
            Address a = Address::program(n.site, frames_.back().ctx);
            AbstractObject obj;
            obj.prototype = proto_of("Object.prototype");
            for (auto& [key, value] : props)
                obj.properties[key] = { value, true };
            allocate_object(s, a, std::move(obj));
            check_object(s, a, n);
            return AbsValue::address(a);
        }
        case NodeKind::Function: return AbsValue::address(make_function(n, s));
        case NodeKind::Unary: return eval_unary(n, s);
        case NodeKind::Update: {
            Ref r = eval_ref(*n.a, s);
            AbsValue old = read_ref(r, s, n);
            AbsNumber num = domain::to_number(to_primitive(old, s, n), k_);
            double delta = n.op == Op::Inc ? 1 : -1;
            AbsNumber next = domain::map_number(num, [delta](double x) { return x + delta; }, k_);
            write_ref(r, AbsValue::number(next), s, n);
            if (!s.live)
                return {};
            return AbsValue::number(n.flag ? next : num);
        }
        case NodeKind::Binary: {
            AbsValue l = eval(*n.a, s);
            AbsValue r = eval(*n.b, s);
            return binary(n.op, l, r, s, n);
        }
        case NodeKind::Logical: {
            Branch b = branch(*n.a, s);
            if (n.op == Op::And) {
                AbsValue rhs = eval(*n.b, b.t);
                s = b.t.join(b.f, k_);
                return falsy_part(b.value).join(rhs, k_);
            }
            AbsValue rhs = eval(*n.b, b.f);
            s = b.t.join(b.f, k_);
            return truthy_part(b.value).join(rhs, k_);
        }
        case NodeKind::Conditional: {
            Branch b = branch(*n.a, s);
            AbsValue x = eval(*n.b, b.t);
            AbsValue y = eval(*n.c, b.f);
            s = b.t.join(b.f, k_);
            return x.join(y, k_);
        }
        case NodeKind::Assign: {
            Ref r = eval_ref(*n.a, s);
            AbsValue v;
            if (n.assign_op == Op::None) {
                v = eval(*n.b, s);
            } else {
                AbsValue old = read_ref(r, s, n);
                AbsValue rhs = eval(*n.b, s);
                v = binary(n.assign_op, old, rhs, s, n);
            }
            write_ref(r, v, s, n);
            return s.live ? v : AbsValue {};
        }
        case NodeKind::Call: return eval_call(n, s, false);
        case NodeKind::New: return eval_call(n, s, true);
        case NodeKind::Member: {
            AbsValue base = eval(*n.a, s);
            return get_property(base, AbsString::constant(n.text), s, n, nullptr);
        }
        case NodeKind::Index: {
            AbsValue base = eval(*n.a, s);
            AbsValue key = eval(*n.b, s);
            return get_property(base, domain::to_property_key(to_primitive(key, s, n), k_), s, n, nullptr);
        }
        case NodeKind::Sequence: {
            AbsValue v;
            for (auto const& item : n.items)
                v = eval(*item, s);
            return v;
        }
        default: return AbsValue::undefined();
        }
    }

    AbsValue eval_unary(Node const& n, State& s)
    {
        switch (n.op) {
        case Op::Typeof: {
            if (n.a->kind == NodeKind::Identifier) {
                Resolution r = resolve(n.a->text, s);
                AbsValue v = r.value;
                if (r.maybe_missing)
                    v = v.join(AbsValue::undefined(), k_);
                return type_of(v, s);
            }
            return type_of(eval(*n.a, s), s);
        }
        case Op::Delete: {
            Node const& t = *n.a;
            if (t.kind != NodeKind::Member && t.kind != NodeKind::Index) {
                if (t.kind != NodeKind::Identifier)
                    eval(t, s);
                return AbsValue::boolean_value(t.kind != NodeKind::Identifier);
            }
            Ref r = eval_ref(t, s);
            if (!s.live)
                return {};
            if (r.base.undef || r.base.null)
                raise_type_error(s, UnexpectedKind::PropertyOfUndefined, n);
            bool strong = r.base.addrs.size() == 1 && r.key.single().has_value();
            for (Address a : r.base.addrs) {
                AbstractObject& obj = s.heap.mutate(a);
                if (r.key.is_set()) {
                    for (auto const& name : r.key.values()) {
                        auto it = obj.properties.find(name);
                        if (it == obj.properties.end())
                            continue;
                        if (strong && !obj.summary)
                            obj.properties.erase(it);
                        else
                            it->second.definite = false;
                    }
                } else {
                    for (auto& [name, prop] : obj.properties)
                        prop.definite = false;
                }
            }
            return AbsValue::boolean_value(true);
        }
        case Op::Void:
            eval(*n.a, s);
            return s.live ? AbsValue::undefined() : AbsValue {};
        case Op::Not: {
            AbsBool b = domain::to_boolean(eval(*n.a, s));
            AbsBool out;
            if (b.may_true())
                out = out.join(AbsBool::constant(false));
            if (b.may_false())
                out = out.join(AbsBool::constant(true));
            return AbsValue::boolean_value(out);
        }
        default: {
            AbsValue v = eval(*n.a, s);
            AbsNumber num = domain::to_number(to_primitive(v, s, n), k_);
            switch (n.op) {
            case Op::Neg: return AbsValue::number(domain::map_number(num, [](double x) { return -x; }, k_));
            case Op::Plus: return AbsValue::number(num);
            case Op::BitNot:
                return AbsValue::number(
                    domain::map_number(num, [](double x) { return static_cast<double>(~js::to_int32(x)); }, k_));
            default: return AbsValue::number(AbsNumber::top());
            }
        }
        }
    }

    // ---- conditions

    // A literal-like operand (typeof excluded), evaluated without effects.
    std::optional<AbsValue> literal_value(Node const& n, State const& s) const
    {
        switch (n.kind) {
        case NodeKind::Number: return AbsValue::number(n.number);
        case NodeKind::String: return AbsValue::string(n.text);
        case NodeKind::Boolean: return AbsValue::boolean_value(n.flag);
        case NodeKind::Null: return AbsValue::null_value();
        case NodeKind::Identifier:
            if (n.text == u"undefined") {
                Resolution r = resolve(n.text, s);
                if (!r.maybe_missing && r.value == AbsValue::undefined())
                    return r.value;
            }
            return std::nullopt;
        case NodeKind::Unary:
            if (n.op == Op::Neg && n.a->kind == NodeKind::Number)
                return AbsValue::number(-n.a->number);
            if (n.op == Op::Void && n.a->kind == NodeKind::Number)
                return AbsValue::undefined();
            return std::nullopt;
        default: return std::nullopt;
        }
    }

    static AbsValue keep_type(AbsValue const& v, std::u16string_view type, bool keep, State const& s)
    {
        AbsValue out = v;
        auto is_fn = [&](Address a) {
            auto const* obj = s.heap.get(a);
            return obj && (obj->cls == ObjClass::Function || obj->cls == ObjClass::Builtin);
        };
        auto select = [&](bool matches, auto&& clear) {
            if (matches != keep)
                clear();
        };
        select(type == u"undefined", [&] { out.undef = false; });
        select(type == u"object", [&] { out.null = false; });
        select(type == u"boolean", [&] { out.boolean = AbsBool::bottom(); });
        select(type == u"number", [&] { out.num = AbsNumber::bottom(); });
        select(type == u"string", [&] { out.str = AbsString::bottom(); });
        std::set<Address> addrs;
        for (Address a : v.addrs) {
            bool matches = is_fn(a) ? type == u"function" : type == u"object";
            if (matches == keep)
                addrs.insert(a);
        }
        out.addrs = std::move(addrs);
        return out;
    }

    AbsValue equal_filter(AbsValue const& v, AbsValue const& lit, bool strict, bool truth) const
    {
        bool nullish = lit.undef || lit.null;
        if (nullish && !strict) {
            if (truth) {
                AbsValue out;
                out.undef = v.undef;
                out.null = v.null;
                return out;
            }
            return without_nullish(v);
        }
        if (!strict)
            return v;
        if (truth) {
            AbsValue out;
            if (lit.undef)
                out.undef = v.undef;
            else if (lit.null)
                out.null = v.null;
            else if (auto b = lit.boolean.single())
                out.boolean = v.boolean.meet(AbsBool::constant(*b));
            else if (auto d = lit.num.single())
                out.num = v.num.contains(*d) ? (*d == 0 ? domain::filter_numbers(v.num.is_top() ? AbsNumber::of({ -0.0, 0.0 }) : v.num, [](double x) { return x == 0; }) : AbsNumber::constant(*d)) : AbsNumber::bottom();
            else if (auto str = lit.str.single())
                out.str = v.str.contains(*str) ? AbsString::constant(*str) : AbsString::bottom();
            else
                return v;
            return out;
        }
        AbsValue out = v;
        if (lit.undef)
            out.undef = false;
        else if (lit.null)
            out.null = false;
        else if (auto b = lit.boolean.single())
            out.boolean = v.boolean.meet(AbsBool::constant(!*b));
        else if (auto d = lit.num.single()) {
            if (*d != 0 && !std::isnan(*d))
                out.num = domain::remove_number(v.num, *d);
        } else if (auto str = lit.str.single())
            out.str = domain::remove_string(v.str, *str);
        return out;
    }

    // Keeps the components whose number conversion passes `keep`; objects
    // and string categories are kept as they are.
    static AbsValue compare_filter(AbsValue const& v, std::function<bool(double)> const& keep)
    {
        AbsValue out;
        out.addrs = v.addrs;
        out.num = domain::filter_numbers(v.num, keep);
        out.undef = v.undef && keep(NAN);
        out.null = v.null && keep(0);
        if (v.boolean.may_true() && keep(1))
            out.boolean = out.boolean.join(AbsBool::constant(true));
        if (v.boolean.may_false() && keep(0))
            out.boolean = out.boolean.join(AbsBool::constant(false));
        out.str = domain::filter_strings(v.str, [&](std::u16string const& s) { return keep(js::string_to_number(s)); });
        return out;
    }

    void refine(Node const& e, State& st, bool truth)
    {
        if (!st.live)
            return;
        switch (e.kind) {
        case NodeKind::Identifier: {
            Resolution r = resolve(e.text, st);
            if (r.maybe_missing)
                return;
            refine_name(e.text, truth ? truthy_part(r.value) : falsy_part(r.value), st);
            return;
        }
        case NodeKind::Assign:
            if (e.a->kind == NodeKind::Identifier && e.assign_op == Op::None)
                refine(*e.a, st, truth);
            return;
        case NodeKind::Binary: break;
        default: return;
        }
        bool eq_op = e.op == Op::Eq || e.op == Op::StrictEq;
        bool ne_op = e.op == Op::Ne || e.op == Op::StrictNe;
        if (eq_op || ne_op) {
            bool strict = e.op == Op::StrictEq || e.op == Op::StrictNe;
            bool t = eq_op ? truth : !truth;
            for (int side = 0; side < 2; ++side) {
                Node const& x = side == 0 ? *e.a : *e.b;
                Node const& y = side == 0 ? *e.b : *e.a;
                if (x.kind == NodeKind::Unary && x.op == Op::Typeof && x.a->kind == NodeKind::Identifier
                    && y.kind == NodeKind::String) {
                    Resolution r = resolve(x.a->text, st);
                    if (r.maybe_missing)
                        return;
                    refine_name(x.a->text, keep_type(r.value, y.text, t, st), st);
                    return;
                }
                if (x.kind != NodeKind::Identifier)
                    continue;
                auto lit = literal_value(y, st);
                if (!lit)
                    continue;
                Resolution r = resolve(x.text, st);
                if (r.maybe_missing)
                    return;
                refine_name(x.text, equal_filter(r.value, *lit, strict, t), st);
                return;
            }
            return;
        }
        if (e.op == Op::Lt || e.op == Op::Gt || e.op == Op::Le || e.op == Op::Ge) {
            for (int side = 0; side < 2; ++side) {
                Node const& x = side == 0 ? *e.a : *e.b;
                Node const& y = side == 0 ? *e.b : *e.a;
                if (x.kind != NodeKind::Identifier)
                    continue;
                auto lit = literal_value(y, st);
                if (!lit || !lit->num.single())
                    continue;
                Resolution r = resolve(x.text, st);
                if (r.maybe_missing)
                    return;
                double c = *lit->num.single();
                Op op = e.op;
                auto keep = [&](double v) {
                    bool holds = side == 0 ? relational(op, v, c) : relational(op, c, v);
                    return holds == truth;
                };
                refine_name(x.text, compare_filter(r.value, keep), st);
                return;
            }
        }
    }

    Branch branch(Node const& e, State s)
    {
        if (!s.live)
            return {};
        if (e.kind == NodeKind::Logical) {
            Branch a = branch(*e.a, std::move(s));
            if (e.op == Op::And) {
                Branch b = branch(*e.b, a.t);
                return { b.t, a.f.join(b.f, k_), falsy_part(a.value).join(b.value, k_) };
            }
            Branch b = branch(*e.b, a.f);
            return { a.t.join(b.t, k_), b.f, truthy_part(a.value).join(b.value, k_) };
        }
        if (e.kind == NodeKind::Unary && e.op == Op::Not) {
            Branch a = branch(*e.a, std::move(s));
            AbsBool b = domain::to_boolean(a.value);
            AbsBool flipped;
            if (b.may_true())
                flipped = flipped.join(AbsBool::constant(false));
            if (b.may_false())
                flipped = flipped.join(AbsBool::constant(true));
            return { a.f, a.t, AbsValue::boolean_value(flipped) };
        }
        AbsValue v = eval(e, s);
        AbsBool b = domain::to_boolean(v);
        Branch out;
        out.value = v;
        out.t = s;
        out.f = std::move(s);
        if (!b.may_true())
            out.t.live = false;
        if (!b.may_false())
            out.f.live = false;
        refine(e, out.t, true);
        refine(e, out.f, false);
        return out;
    }

    // ---- statements

    void merge_abrupt(Flow& dst, Flow& src)
    {
        for (auto& [label, st] : src.breaks)
            join_into(dst.breaks[label], st, k_);
        for (auto& [label, st] : src.continues)
            join_into(dst.continues[label], st, k_);
        join_into(dst.ret, src.ret, k_);
        dst.ret_value = dst.ret_value.join(src.ret_value, k_);
    }

    Flow exec_list(std::vector<js::NodePtr> const& items, State s)
    {
        Flow acc;
        for (auto const& item : items) {
            if (!s.live)
                break;
            Flow f = exec(*item, std::move(s), {});
            merge_abrupt(acc, f);
            s = std::move(f.normal);
        }
        acc.normal = std::move(s);
        return acc;
    }

    Flow exec(Node const& n, State s, std::vector<std::u16string> const& labels)
    {
        Flow out;
        if (!s.live)
            return out;
        tick(s);
        if (opts_.probe && n.kind != NodeKind::Block) {
            State const* view = &s;
            Probe p { n, frames_.back().script, [this, view](std::u16string_view name) {
                         return resolve(std::u16string(name), *view).value;
                     } };
            opts_.probe(p);
        }
        switch (n.kind) {
        case NodeKind::VarDecl:
            for (auto const& d : n.items) {
                if (!d->a)
                    continue;
                AbsValue v = eval(*d->a, s);
                write_name(d->text, v, s);
            }
            out.normal = std::move(s);
            return out;
        case NodeKind::FunctionDecl:
        case NodeKind::Empty:
        case NodeKind::Debugger: out.normal = std::move(s); return out;
        case NodeKind::ExprStmt:
            eval(*n.a, s);
            out.normal = std::move(s);
            return out;
        case NodeKind::Block: return exec_list(n.items, std::move(s));
        case NodeKind::If: {
            Branch b = branch(*n.a, std::move(s));
            Flow t = exec(*n.b, std::move(b.t), {});
            Flow f;
            if (n.c)
                f = exec(*n.c, std::move(b.f), {});
            else
                f.normal = std::move(b.f);
            merge_abrupt(t, f);
            t.normal = t.normal.join(f.normal, k_);
            return t;
        }
        case NodeKind::While:
        case NodeKind::DoWhile:
        case NodeKind::For:
        case NodeKind::ForIn: return exec_loop(n, std::move(s), labels);
        case NodeKind::Return: {
            AbsValue v = n.a ? eval(*n.a, s) : AbsValue::undefined();
            if (s.live) {
                out.ret = std::move(s);
                out.ret_value = v;
            }
            return out;
        }
        case NodeKind::Break: out.breaks[n.text] = std::move(s); return out;
        case NodeKind::Continue: out.continues[n.text] = std::move(s); return out;
        case NodeKind::Throw: {
            AbsValue v = eval(*n.a, s);
            raise(std::move(s), v, n);
            return out;
        }
        case NodeKind::Try: return exec_try(n, std::move(s));
        case NodeKind::Switch: return exec_switch(n, std::move(s));
        case NodeKind::Labeled: {
            std::vector<std::u16string> inner = labels;
            inner.push_back(n.text);
            Flow f = exec(*n.a, std::move(s), inner);
            if (auto it = f.breaks.find(n.text); it != f.breaks.end()) {
                join_into(f.normal, it->second, k_);
                f.breaks.erase(it);
            }
            return f;
        }
        case NodeKind::With: {
            unexpected(UnexpectedKind::With, n);
            eval(*n.a, s);
            return exec(*n.b, std::move(s), {});
        }
        default:
            eval(n, s);
            out.normal = std::move(s);
            return out;
        }
    }

    AbsString enumerate_keys(AbsValue const& v, State const& s) const
    {
        AbsString keys;
        if (!v.str.is_bottom())
            keys = keys.join(AbsString::number_str(), k_);
        std::vector<Address> work(v.addrs.begin(), v.addrs.end());
        std::set<Address> seen;
        std::set<std::u16string> names;
        bool unknown = false, numeric = false;
        while (!work.empty()) {
            Address a = work.back();
            work.pop_back();
            if (!seen.insert(a).second)
                continue;
            auto const* obj = s.heap.get(a);
            if (!obj)
                continue;
            // built-in prototypes contribute nothing enumerable
            if (a.space == AddressSpace::Model && !v.addrs.count(a))
                continue;
            for (auto const& [name, prop] : obj->properties)
                names.insert(name);
            if (!obj->default_field.is_bottom())
                unknown = true;
            if (obj->cls == ObjClass::Array && !obj->internal_length.is_set())
                numeric = true;
            work.insert(work.end(), obj->prototype.begin(), obj->prototype.end());
        }
        keys = keys.join(AbsString::of(std::move(names), k_), k_);
        if (unknown)
            keys = keys.join(AbsString::top(), k_);
        if (numeric)
            keys = keys.join(AbsString::number_str(), k_);
        return keys;
    }

    Flow exec_loop(Node const& n, State s, std::vector<std::u16string> const& labels)
    {
        std::vector<std::u16string> own = labels;
        own.push_back(u"");
        Node const* test = nullptr;
        Node const* body = nullptr;
        Node const* update = nullptr;
        AbsString keys;
        switch (n.kind) {
        case NodeKind::While: test = n.a.get(), body = n.b.get(); break;
        case NodeKind::DoWhile: body = n.a.get(), test = n.b.get(); break;
        case NodeKind::For:
            if (n.a) {
                if (n.a->kind == NodeKind::VarDecl) {
                    Flow init = exec(*n.a, std::move(s), {});
                    s = std::move(init.normal);
                } else {
                    eval(*n.a, s);
                }
            }
            test = n.b.get();
            update = n.c.get();
            body = n.d.get();
            break;
        default: { // ForIn
            AbsValue obj = eval(*n.b, s);
            keys = enumerate_keys(obj, s);
            body = n.c.get();
            if (keys.is_bottom()) {
                Flow out;
                out.normal = std::move(s);
                return out;
            }
            break;
        }
        }
        struct Step {
            State exit;
            State back;
            Flow last;
        };
        auto step = [&](State const& head) {
            tick(head);
            Step st;
            if (n.kind == NodeKind::DoWhile) {
                st.last = exec(*body, head, {});
                State after = st.last.normal;
                for (auto const& l : own)
                    if (auto it = st.last.continues.find(l); it != st.last.continues.end())
                        join_into(after, it->second, k_);
                Branch b = branch(*test, std::move(after));
                st.back = std::move(b.t);
                st.exit = std::move(b.f);
                return st;
            }
            State body_in;
            if (n.kind == NodeKind::ForIn) {
                body_in = head;
                st.exit = head;
                Node const& t = *n.a;
                if (t.kind == NodeKind::VarDecl) {
                    write_name(t.items.front()->text, AbsValue::string(keys), body_in);
                } else {
                    Ref r = eval_ref(t, body_in);
                    write_ref(r, AbsValue::string(keys), body_in, t);
                }
            } else if (test) {
                Branch b = branch(*test, head);
                body_in = std::move(b.t);
                st.exit = std::move(b.f);
            } else {
                body_in = head;
            }
            st.last = exec(*body, std::move(body_in), {});
            State after = st.last.normal;
            for (auto const& l : own)
                if (auto it = st.last.continues.find(l); it != st.last.continues.end())
                    join_into(after, it->second, k_);
            if (update)
                eval(*update, after);
            st.back = std::move(after);
            return st;
        };

        Flow out;
        auto absorb = [&](Step& st) {
            join_into(out.normal, st.exit, k_);
            for (auto& [label, flow] : st.last.breaks) {
                if (std::find(own.begin(), own.end(), label) != own.end())
                    join_into(out.normal, flow, k_);
                else
                    join_into(out.breaks[label], flow, k_);
            }
            for (auto& [label, flow] : st.last.continues)
                if (std::find(own.begin(), own.end(), label) == own.end())
                    join_into(out.continues[label], flow, k_);
            join_into(out.ret, st.last.ret, k_);
            out.ret_value = out.ret_value.join(st.last.ret_value, k_);
        };

        // Iterations whose test has one outcome run without joining.
        State head = std::move(s);
        std::optional<Step> first;
        if (n.kind != NodeKind::ForIn) {
            for (size_t unrolled = 0; head.live && unrolled < opts_.max_unroll; ++unrolled) {
                Step st = step(head);
                if (st.exit.live && st.back.live) {
                    first = std::move(st);
                    break;
                }
                absorb(st);
                head = std::move(st.back);
            }
        }
        if (!head.live)
            return out;

        Step last;
        for (size_t iteration = 0;; ++iteration) {
            if (iteration == 0 && first)
                last = std::move(*first);
            else
                last = step(head);
            State next = head.join(last.back, k_);
            if (next.leq(head))
                break;
            head = iteration < k_ ? std::move(next) : head.widen(next, k_);
        }
        absorb(last);
        return out;
    }

    Flow exec_switch(Node const& n, State s)
    {
        AbsValue d = eval(*n.a, s);
        State unmatched = std::move(s);
        std::vector<State> entry(n.items.size());
        std::optional<size_t> default_index;
        for (size_t i = 0; i < n.items.size(); ++i) {
            Node const& c = *n.items[i];
            if (!c.a) {
                default_index = i;
                continue;
            }
            if (!unmatched.live)
                break;
            AbsValue v = eval(*c.a, unmatched);
            AbsBool eq = domain::to_boolean(equality(Op::StrictEq, d, v, unmatched, c));
            State matched = unmatched;
            if (!eq.may_true())
                matched.live = false;
            if (n.a->kind == NodeKind::Identifier) {
                if (auto lit = literal_value(*c.a, unmatched)) {
                    Resolution r = resolve(n.a->text, unmatched);
                    if (!r.maybe_missing) {
                        refine_name(n.a->text, equal_filter(r.value, *lit, true, true), matched);
                        AbsValue rest = equal_filter(r.value, *lit, true, false);
                        if (eq.may_false())
                            refine_name(n.a->text, rest, unmatched);
                    }
                }
            }
            join_into(entry[i], matched, k_);
            if (!eq.may_false())
                unmatched.live = false;
        }
        Flow out;
        State exit;
        if (default_index)
            join_into(entry[*default_index], unmatched, k_);
        else
            exit = std::move(unmatched);
        State fall;
        for (size_t i = 0; i < n.items.size(); ++i) {
            State in = fall.join(entry[i], k_);
            Flow f = exec_list(n.items[i]->items, std::move(in));
            if (auto it = f.breaks.find(u""); it != f.breaks.end()) {
                join_into(exit, it->second, k_);
                f.breaks.erase(it);
            }
            merge_abrupt(out, f);
            fall = std::move(f.normal);
        }
        join_into(exit, fall, k_);
        out.normal = std::move(exit);
        return out;
    }

    struct Sink {
        State state;
        AbsValue value;
        std::optional<std::pair<uint32_t, js::Span>> site;
    };

    Sink take_sink()
    {
        Sink s { std::move(exc_state_), std::move(exc_value_), exc_site_ };
        exc_state_ = State {};
        exc_value_ = AbsValue {};
        exc_site_.reset();
        return s;
    }

    void restore_sink(Sink saved)
    {
        exc_state_ = std::move(saved.state);
        exc_value_ = std::move(saved.value);
        exc_site_ = saved.site;
    }

    Flow exec_try(Node const& n, State s)
    {
        bool has_catch = n.b != nullptr;
        Sink outer = take_sink();
        if (has_catch)
            ++catching_;
        Flow body;
        try {
            body = exec(*n.a, std::move(s), {});
        } catch (...) {
            if (has_catch)
                --catching_;
            throw;
        }
        if (has_catch)
            --catching_;
        Sink thrown = take_sink();
        if (has_catch && thrown.state.live) {
            State cs = std::move(thrown.state);
            Frame& f = frames_.back();
            Address catch_env = Address::of(AddressSpace::Scope, catch_site_bit | id_of(n), f.ctx);
            AbstractObject env;
            env.cls = ObjClass::Environment;
            env.scope = { f.env };
            env.properties[n.text] = { thrown.value, true };
            allocate_object(cs, catch_env, std::move(env));
            Address saved_env = f.env;
            f.env = catch_env;
            Flow cf;
            try {
                cf = exec(*n.b, std::move(cs), {});
            } catch (...) {
                frames_.back().env = saved_env;
                throw;
            }
            frames_.back().env = saved_env;
            merge_abrupt(body, cf);
            body.normal = body.normal.join(cf.normal, k_);
            thrown = take_sink();
        }
        restore_sink(std::move(outer));
        if (!n.c) {
            if (thrown.state.live)
                raise(std::move(thrown.state), thrown.value, n);
            return body;
        }
        // finally runs once over every way of reaching it
        State in = body.normal.join(body.ret, k_).join(thrown.state, k_);
        for (auto const& [label, st] : body.breaks)
            join_into(in, st, k_);
        for (auto const& [label, st] : body.continues)
            join_into(in, st, k_);
        Flow fin = exec(*n.c, std::move(in), {});
        Flow out;
        State const& after = fin.normal;
        if (after.live) {
            if (body.normal.live)
                out.normal = after;
            for (auto const& [label, st] : body.breaks)
                if (st.live)
                    out.breaks[label] = after;
            for (auto const& [label, st] : body.continues)
                if (st.live)
                    out.continues[label] = after;
            if (body.ret.live) {
                out.ret = after;
                out.ret_value = body.ret_value;
            }
            if (thrown.state.live)
                raise(after, thrown.value, n);
        }
        merge_abrupt(out, fin);
        return out;
    }

    // ---- scripts and handlers

    State finish_script(Flow fl, Sink outer, Node const* site_node)
    {
        State out = fl.normal.join(fl.ret, k_);
        Sink thrown = take_sink();
        if (thrown.state.live) {
            BehaviorEvent e;
            e.kind = EventKind::UnexpectedBehavior;
            e.detail = std::string(unexpected_kind_name(UnexpectedKind::UncaughtException));
            if (thrown.site) {
                e.script = thrown.site->first;
                e.span = thrown.site->second;
            } else if (site_node) {
                e.script = frames_.back().script;
                e.span = site_node->span;
            }
            log_.add(std::move(e), k_);
            out = out.join(thrown.state, k_);
        }
        restore_sink(std::move(outer));
        return out;
    }

    State run_script(uint32_t index, State s)
    {
        frames_.push_back(Frame { env_.global, AbsValue::address(env_.doc), 0, index });
        Sink outer = take_sink();
        hoist_top(tops_[index], s);
        Flow fl = exec_list(scripts_[index].program->body, std::move(s));
        State out = finish_script(std::move(fl), std::move(outer), nullptr);
        frames_.pop_back();
        return out;
    }

    State run_function_handler(Node const& decl, uint32_t script, State s)
    {
        auto const* global = s.heap.get(env_.global);
        if (!global)
            return s;
        AbsValue fn = domain::property_match(*global, AbsString::constant(decl.text), k_).value;
        fn = addresses_only(fn);
        if (fn.is_bottom())
            return s;
        frames_.push_back(Frame { env_.global, AbsValue::address(env_.doc), 0, script });
        Sink outer = take_sink();
        AbsValue any = AbsValue::string(AbsString::top())
                           .join(AbsValue::number(AbsNumber::top()), k_)
                           .join(AbsValue::boolean_value(AbsBool::top()), k_);
        std::vector<AbsValue> args(decl.params.size(), any);
        AbsValue this_value = AbsValue::address(env_.doc);
        call_value(fn, this_value, args, s, decl, handler_context_bit | id_of(decl), false, false, false);
        Flow fl;
        fl.normal = std::move(s);
        State out = finish_script(std::move(fl), std::move(outer), &decl);
        frames_.pop_back();
        return out;
    }

    State drive(State s, uint32_t first_handler, size_t& rounds)
    {
        std::vector<std::pair<Node const*, uint32_t>> fn_handlers;
        if (opts_.function_handlers) {
            for (uint32_t i = 0; i < tops_.size(); ++i)
                for (Node const* decl : tops_[i].decls)
                    if (!referenced_.count(decl->text))
                        fn_handlers.push_back({ decl, i });
        }
        uint32_t script_handlers = static_cast<uint32_t>(scripts_.size()) - first_handler;
        if (script_handlers == 0 && fn_handlers.empty())
            return s;
        for (size_t round = 0;; ++round) {
            tick(s);
            State next = s;
            for (uint32_t i = first_handler; i < scripts_.size(); ++i)
                join_into(next, run_script(i, s), k_);
            for (auto const& [decl, script] : fn_handlers)
                join_into(next, run_function_handler(*decl, script, s), k_);
            ++rounds;
            if (next.leq(s))
                return s;
            s = round < k_ ? std::move(next) : s.widen(next, k_);
        }
    }
};

}

Outcome analyze(std::vector<Script> const& preamble, std::vector<Script> const& handlers,
                model::ModelEnvironment const& env, Budget const& budget, Options const& options)
{
    Analyzer analyzer(env, budget, options);
    return analyzer.run(preamble, handlers);
}

}
