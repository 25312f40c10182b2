// SPDX-License-Identifier: Apache-2.0
#include "safepdf/model/builtins.hpp"

#include "safepdf/domain/ops.hpp"
#include "safepdf/js/ast.hpp"
#include "safepdf/js/number.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace safepdf::model {

using domain::AbsBool;
using domain::AbsNumber;
using domain::NumberLess;

namespace {

constexpr size_t max_combinations = 512;
constexpr uint32_t max_exact_array = 256;

using NumSet = std::set<double, NumberLess>;
using StrSet = std::set<std::u16string>;
// A numeric argument; nullopt stands for `undefined`.
using NumArg = std::optional<double>;

int hex_digit(char16_t c)
{
    if (c >= '0' && c <= '9')
        return c - '0';
    if (c >= 'a' && c <= 'f')
        return c - 'a' + 10;
    if (c >= 'A' && c <= 'F')
        return c - 'A' + 10;
    return -1;
}

double to_integer(double d)
{
    if (std::isnan(d))
        return 0;
    if (std::isinf(d))
        return d;
    return std::trunc(d);
}

uint64_t bound_of(AbsString const& s)
{
    if (!s.is_set())
        return s.length_bound();
    uint64_t m = 0;
    for (auto const& v : s.values())
        m = std::max<uint64_t>(m, v.size());
    return m;
}

AbsValue without_nullish(AbsValue v)
{
    v.undef = false;
    v.null = false;
    return v;
}

std::optional<std::vector<NumArg>> num_args(AbsValue v, size_t k)
{
    std::vector<NumArg> out;
    if (v.undef)
        out.push_back(std::nullopt);
    v.undef = false;
    if (v.is_bottom())
        return out;
    AbsNumber n = domain::to_number(v, k);
    if (n.is_top())
        return std::nullopt;
    for (double d : n.values())
        out.push_back(d);
    return out;
}

std::optional<std::vector<std::u16string>> str_values(AbsString const& s)
{
    if (!s.is_set() && !s.is_bottom())
        return std::nullopt;
    return std::vector<std::u16string>(s.values().begin(), s.values().end());
}

struct Call {
    ApiInfo const& api;
    Host& h;
    AbsValue const& self;
    std::vector<AbsValue> const& args;
    bool construct;
    size_t k;

    AbsValue arg(size_t i) const { return i < args.size() ? args[i] : AbsValue::undefined(); }

    // The string receiver of a String.prototype method.
    AbsString this_string() const
    {
        if (self.undef || self.null)
            h.type_error("string method called on null or undefined");
        return domain::to_string(without_nullish(self), k);
    }

    AbsValue strings(StrSet values) const
    {
        return AbsValue::string(AbsString::of(std::move(values), k));
    }
    AbsValue numbers(NumSet values) const { return AbsValue::number(AbsNumber::of(std::move(values), k)); }

    Address new_object(ObjClass cls, std::string_view proto, uint32_t slot = 0) const
    {
        Address a = h.allocate(cls, proto, slot);
        AbstractObject& obj = h.mutate(a);
        obj.cls = cls;
        if (cls == ObjClass::Array && obj.internal_length.is_bottom())
            obj.internal_length = AbsNumber::constant(0);
        return a;
    }

    void set(Address a, std::u16string const& key, AbsValue const& v) const
    {
        domain::write_property(h.mutate(a), AbsString::constant(key), v, true, k);
    }
};

// Applies `f` to every combination of a string receiver and numeric
// arguments; nullopt when there are too many or one is not enumerable.
template <class F>
std::optional<StrSet> string_product(std::vector<std::u16string> const& strs, std::vector<std::vector<NumArg>> const& nums,
                                     F&& f)
{
    size_t total = strs.size();
    for (auto const& n : nums)
        total *= std::max<size_t>(n.size(), 1);
    if (total > max_combinations)
        return std::nullopt;
    StrSet out;
    std::vector<NumArg> pick(nums.size());
    for (auto const& s : strs) {
        std::vector<size_t> idx(nums.size(), 0);
        bool done = false;
        while (!done) {
            bool empty = false;
            for (size_t i = 0; i < nums.size(); ++i) {
                if (nums[i].empty()) {
                    empty = true;
                    break;
                }
                pick[i] = nums[i][idx[i]];
            }
            if (empty)
                break;
            out.insert(f(s, pick));
            done = true;
            for (size_t i = 0; i < nums.size(); ++i) {
                if (++idx[i] < nums[i].size()) {
                    done = false;
                    break;
                }
                idx[i] = 0;
            }
        }
    }
    return out;
}

std::vector<std::vector<NumArg>> collect_nums(Call const& c, size_t count, bool& ok)
{
    std::vector<std::vector<NumArg>> nums;
    for (size_t i = 0; i < count; ++i) {
        auto n = num_args(c.arg(i), c.k);
        if (!n) {
            ok = false;
            return {};
        }
        nums.push_back(std::move(*n));
    }
    ok = true;
    return nums;
}

// Receiver-and-numbers string method with a concretely defined result.
template <class F>
AbsValue string_method(Call const& c, size_t argc, F&& f)
{
    AbsString self = c.this_string();
    auto strs = str_values(self);
    bool ok = false;
    auto nums = collect_nums(c, argc, ok);
    if (strs && ok) {
        if (auto out = string_product(*strs, nums, f))
            return c.strings(std::move(*out));
    }
    return AbsValue::string(AbsString::top(bound_of(self)));
}

template <class F>
AbsValue number_method(Call const& c, size_t argc, F&& f)
{
    AbsString self = c.this_string();
    auto strs = str_values(self);
    bool ok = false;
    auto nums = collect_nums(c, argc, ok);
    if (strs && ok) {
        auto out = string_product(*strs, nums, [&](std::u16string const& s, std::vector<NumArg> const& a) {
            return js::number_to_u16string(f(s, a));
        });
        if (out) {
            NumSet values;
            for (auto const& s : *out)
                values.insert(js::string_to_number(s));
            return c.numbers(std::move(values));
        }
    }
    return AbsValue::number(AbsNumber::top());
}

std::u16string substr(std::u16string const& s, std::vector<NumArg> const& a)
{
    double len = static_cast<double>(s.size());
    double start = to_integer(a[0].value_or(0));
    double count = a[1] ? to_integer(*a[1]) : INFINITY;
    if (start < 0)
        start = std::max(len + start, 0.0);
    start = std::min(start, len);
    count = std::min(std::max(count, 0.0), len - start);
    if (count <= 0)
        return {};
    return s.substr(static_cast<size_t>(start), static_cast<size_t>(count));
}

std::u16string substring(std::u16string const& s, std::vector<NumArg> const& a)
{
    double len = static_cast<double>(s.size());
    double from = std::clamp(to_integer(a[0].value_or(0)), 0.0, len);
    double to = a[1] ? std::clamp(to_integer(*a[1]), 0.0, len) : len;
    if (from > to)
        std::swap(from, to);
    return s.substr(static_cast<size_t>(from), static_cast<size_t>(to - from));
}

std::u16string slice(std::u16string const& s, std::vector<NumArg> const& a)
{
    double len = static_cast<double>(s.size());
    auto rel = [&](double v) { return v < 0 ? std::max(len + v, 0.0) : std::min(v, len); };
    double from = rel(to_integer(a[0].value_or(0)));
    double to = a[1] ? rel(to_integer(*a[1])) : len;
    if (to <= from)
        return {};
    return s.substr(static_cast<size_t>(from), static_cast<size_t>(to - from));
}

std::u16string char_at(std::u16string const& s, std::vector<NumArg> const& a)
{
    double pos = to_integer(a[0].value_or(0));
    if (pos < 0 || pos >= static_cast<double>(s.size()))
        return {};
    return s.substr(static_cast<size_t>(pos), 1);
}

bool ascii_only(std::u16string const& s)
{
    return std::all_of(s.begin(), s.end(), [](char16_t c) { return c < 128; });
}

double parse_int(std::u16string const& text, NumArg radix_arg)
{
    size_t i = 0;
    while (i < text.size() && (js::is_js_whitespace(text[i]) || js::is_js_line_terminator(text[i])))
        ++i;
    double sign = 1;
    if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
        if (text[i] == '-')
            sign = -1;
        ++i;
    }
    int32_t radix = radix_arg ? js::to_int32(*radix_arg) : 0;
    bool strip_prefix = true;
    if (radix != 0) {
        if (radix < 2 || radix > 36)
            return NAN;
        strip_prefix = radix == 16;
    } else {
        radix = 10;
    }
    if (strip_prefix && i + 1 < text.size() && text[i] == '0' && (text[i + 1] == 'x' || text[i + 1] == 'X')) {
        i += 2;
        radix = 16;
    }
    std::string digits;
    for (; i < text.size(); ++i) {
        char16_t c = text[i];
        int d = -1;
        if (c >= '0' && c <= '9')
            d = c - '0';
        else if (c >= 'a' && c <= 'z')
            d = c - 'a' + 10;
        else if (c >= 'A' && c <= 'Z')
            d = c - 'A' + 10;
        if (d < 0 || d >= radix)
            break;
        digits += static_cast<char>(c);
    }
    if (digits.empty())
        return NAN;
    if (radix == 10)
        return sign * std::strtod(digits.c_str(), nullptr);
    double value = 0;
    for (char c : digits) {
        int d = std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : std::tolower(c) - 'a' + 10;
        value = value * radix + d;
    }
    return sign * value;
}

double parse_float(std::u16string const& text)
{
    size_t i = 0;
    while (i < text.size() && (js::is_js_whitespace(text[i]) || js::is_js_line_terminator(text[i])))
        ++i;
    std::u16string_view rest = std::u16string_view(text).substr(i);
    size_t p = 0;
    if (p < rest.size() && (rest[p] == '+' || rest[p] == '-'))
        ++p;
    if (rest.substr(p, 8) == u"Infinity")
        return rest[0] == '-' ? -INFINITY : INFINITY;
    auto digits = [&] {
        size_t start = p;
        while (p < rest.size() && rest[p] >= '0' && rest[p] <= '9')
            ++p;
        return p - start;
    };
    size_t int_digits = digits();
    size_t frac_digits = 0;
    if (p < rest.size() && rest[p] == '.') {
        size_t save = p++;
        frac_digits = digits();
        if (int_digits == 0 && frac_digits == 0)
            p = save;
    }
    if (int_digits == 0 && frac_digits == 0)
        return NAN;
    if (p < rest.size() && (rest[p] == 'e' || rest[p] == 'E')) {
        size_t save = p++;
        if (p < rest.size() && (rest[p] == '+' || rest[p] == '-'))
            ++p;
        if (digits() == 0)
            p = save;
    }
    return js::string_to_number(rest.substr(0, p));
}

double js_round(double x)
{
    if (std::isnan(x) || std::isinf(x))
        return x;
    double r = std::floor(x);
    if (x - r >= 0.5)
        r += 1;
    if (r == 0 && std::signbit(x))
        return -0.0;
    return r;
}

double js_pow(double x, double y)
{
    if (std::isnan(y))
        return NAN;
    if (y == 0)
        return 1;
    if (std::isnan(x))
        return NAN;
    if (std::fabs(x) == 1 && std::isinf(y))
        return NAN;
    return std::pow(x, y);
}

double js_max(double a, double b)
{
    if (std::isnan(a) || std::isnan(b))
        return NAN;
    if (a == 0 && b == 0)
        return std::signbit(a) ? b : a;
    return std::max(a, b);
}

double js_min(double a, double b)
{
    if (std::isnan(a) || std::isnan(b))
        return NAN;
    if (a == 0 && b == 0)
        return std::signbit(a) ? a : b;
    return std::min(a, b);
}

// ES5 GetSubstitution for a string pattern.
std::u16string substitute(std::u16string const& s, size_t pos, std::u16string const& matched,
                          std::u16string const& repl)
{
    std::u16string out;
    for (size_t i = 0; i < repl.size(); ++i) {
        if (repl[i] != '$' || i + 1 == repl.size()) {
            out += repl[i];
            continue;
        }
        char16_t n = repl[i + 1];
        if (n == '$')
            out += u'$';
        else if (n == '&')
            out += matched;
        else if (n == '`')
            out += s.substr(0, pos);
        else if (n == '\'')
            out += s.substr(pos + matched.size());
        else {
            out += repl[i];
            continue;
        }
        ++i;
    }
    return out;
}

std::vector<std::u16string> split_string(std::u16string const& s, std::optional<std::u16string> const& sep,
                                         uint32_t limit)
{
    std::vector<std::u16string> out;
    if (limit == 0)
        return out;
    if (!sep) {
        out.push_back(s);
        return out;
    }
    if (s.empty()) {
        if (!sep->empty())
            out.push_back(s);
        return out;
    }
    if (sep->empty()) {
        for (size_t i = 0; i < s.size() && out.size() < limit; ++i)
            out.push_back(s.substr(i, 1));
        return out;
    }
    size_t start = 0;
    while (out.size() < limit) {
        size_t hit = s.find(*sep, start);
        if (hit == std::u16string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, hit - start));
        start = hit + sep->size();
    }
    return out;
}

// Values of all index properties plus the default field.
AbsValue index_union(AbstractObject const& obj, size_t k)
{
    AbsValue u = obj.default_field;
    for (auto const& [name, prop] : obj.properties)
        if (domain::array_index(name))
            u = u.join(prop.value, k);
    return u;
}

// Arrays whose items moved around: every index may hold any of the items.
void scramble_indices(AbstractObject& obj, AbsValue const& extra, size_t k)
{
    AbsValue u = index_union(obj, k).join(extra, k);
    for (auto& [name, prop] : obj.properties) {
        if (domain::array_index(name)) {
            prop.value = u;
            prop.definite = false;
        }
    }
    obj.default_field = obj.default_field.join(u, k);
}

AbsNumber shift_length(AbsNumber const& len, double delta, size_t k)
{
    return domain::map_number(len, [delta](double n) { return std::max(0.0, n + delta); }, k);
}

AbsValue array_method(Call const& c, std::string_view name);

std::optional<size_t> api_index(ModelEnvironment const& env, std::string_view path)
{
    for (size_t i = 0; i < env.apis.size(); ++i)
        if (env.apis[i].path == path)
            return i;
    return std::nullopt;
}

AbsValue wrapper_object(Call const& c, AbsValue const& v)
{
    std::string_view proto = "Object.prototype";
    if (!v.str.is_bottom() && v.num.is_bottom() && v.boolean.is_bottom())
        proto = "String.prototype";
    else if (v.str.is_bottom() && !v.num.is_bottom() && v.boolean.is_bottom())
        proto = "Number.prototype";
    else if (v.str.is_bottom() && v.num.is_bottom() && !v.boolean.is_bottom())
        proto = "Boolean.prototype";
    return AbsValue::address(c.new_object(ObjClass::Plain, proto));
}

AbsValue run(Call const& c)
{
    std::string_view name = c.api.builtin;
    Host& h = c.h;
    size_t k = c.k;

    if (name == "eval") {
        AbsValue code = c.arg(0);
        if (code.str.is_bottom())
            return code;
        code.str = AbsString::bottom();
        return code.join(AbsValue::top_primitive(), k);
    }
    if (name == "Function") {
        Address a = c.new_object(ObjClass::Builtin, "Function.prototype");
        h.mutate(a).code = static_cast<uint32_t>(api_index(h.environment(), c.api.path).value_or(0));
        return AbsValue::address(a);
    }
    if (name == "call") {
        std::vector<AbsValue> rest(c.args.size() > 1 ? c.args.begin() + 1 : c.args.end(), c.args.end());
        return h.call(c.self, c.arg(0), rest);
    }
    if (name == "apply") {
        AbsValue list = c.arg(1);
        std::vector<AbsValue> rest;
        AbsValue items = without_nullish(list);
        if (!items.is_bottom()) {
            std::optional<double> n;
            if (items.addrs.size() == 1 && !items.has_primitive())
                if (auto const* obj = h.object(*items.addrs.begin()); obj && obj->cls == ObjClass::Array)
                    n = obj->internal_length.single();
            if (n && *n <= 32 && !list.undef && !list.null) {
                for (uint32_t i = 0; i < *n; ++i)
                    rest.push_back(h.get(items, AbsString::constant(js::number_to_u16string(i))));
            } else {
                AbsValue any = h.get(items, AbsString::number_str()).join(AbsValue::undefined(), k);
                rest.assign(8, any);
            }
        }
        return h.call(c.self, c.arg(0), rest);
    }
    if (name == "parseInt") {
        AbsString s = domain::to_string(c.arg(0), k);
        auto strs = str_values(s);
        auto radix = num_args(c.arg(1), k);
        if (strs && radix && strs->size() * radix->size() <= max_combinations) {
            NumSet out;
            for (auto const& v : *strs)
                for (auto r : *radix)
                    out.insert(parse_int(v, r));
            return c.numbers(std::move(out));
        }
        return AbsValue::number(AbsNumber::top());
    }
    if (name == "parseFloat") {
        AbsString s = domain::to_string(c.arg(0), k);
        if (auto strs = str_values(s)) {
            NumSet out;
            for (auto const& v : *strs)
                out.insert(parse_float(v));
            return c.numbers(std::move(out));
        }
        return AbsValue::number(AbsNumber::top());
    }
    if (name == "isNaN" || name == "isFinite") {
        AbsNumber n = domain::to_number(c.arg(0), k);
        if (n.is_top())
            return AbsValue::boolean_value(AbsBool::top());
        AbsBool out;
        for (double d : n.values())
            out = out.join(AbsBool::constant(name == "isNaN" ? std::isnan(d) : std::isfinite(d)));
        return AbsValue::boolean_value(out);
    }
    if (name == "escape" || name == "unescape") {
        AbsString s = domain::to_string(c.arg(0), k);
        auto f = name == "escape" ? escape_string : unescape_string;
        uint64_t bound = name == "escape" ? domain::saturating_mul(bound_of(s), 6) : bound_of(s);
        return AbsValue::string(domain::map_string(
            s, [f](std::u16string const& v) { return f(v); }, AbsString::top(bound), k, h.string_cap()));
    }
    if (name == "Object") {
        AbsValue v = c.arg(0);
        AbsValue out;
        out.addrs = v.addrs;
        if (v.undef || v.null)
            out = out.join(AbsValue::address(c.new_object(ObjClass::Plain, "Object.prototype")), k);
        AbsValue prims = v;
        prims.addrs.clear();
        prims.undef = prims.null = false;
        if (!prims.is_bottom())
            out = out.join(wrapper_object(c, prims), k);
        return out;
    }
    if (name == "objectToString") {
        StrSet out;
        if (c.self.undef)
            out.insert(u"[object Undefined]");
        if (c.self.null)
            out.insert(u"[object Null]");
        if (!c.self.str.is_bottom())
            out.insert(u"[object String]");
        if (!c.self.num.is_bottom())
            out.insert(u"[object Number]");
        if (!c.self.boolean.is_bottom())
            out.insert(u"[object Boolean]");
        for (Address a : c.self.addrs) {
            auto const* obj = h.object(a);
            ObjClass cls = obj ? obj->cls : ObjClass::Plain;
            switch (cls) {
            case ObjClass::Array: out.insert(u"[object Array]"); break;
            case ObjClass::Function:
            case ObjClass::Builtin: out.insert(u"[object Function]"); break;
            case ObjClass::Regex: out.insert(u"[object RegExp]"); break;
            case ObjClass::Error: out.insert(u"[object Error]"); break;
            case ObjClass::Date: out.insert(u"[object Date]"); break;
            case ObjClass::Arguments: out.insert(u"[object Arguments]"); break;
            default: out.insert(u"[object Object]"); break;
            }
        }
        return c.strings(std::move(out));
    }
    if (name == "valueOf") {
        AbsValue out = without_nullish(c.self);
        // wrapper objects unwrap to an unknown primitive
        if (!out.addrs.empty())
            out = out.join(AbsValue::top_primitive(), k);
        return out;
    }
    if (name == "String") {
        if (c.construct)
            return wrapper_object(c, AbsValue::string(AbsString::top()));
        if (c.args.empty())
            return AbsValue::string(std::u16string());
        return AbsValue::string(domain::to_string(c.arg(0), k));
    }
    if (name == "Number") {
        if (c.construct)
            return wrapper_object(c, AbsValue::number(AbsNumber::top()));
        if (c.args.empty())
            return AbsValue::number(0.0);
        return AbsValue::number(domain::to_number(c.arg(0), k));
    }
    if (name == "Boolean") {
        if (c.construct)
            return wrapper_object(c, AbsValue::boolean_value(AbsBool::top()));
        return AbsValue::boolean_value(domain::to_boolean(c.arg(0)));
    }
    if (name == "fromCharCode") {
        bool ok = false;
        auto nums = collect_nums(c, c.args.size(), ok);
        if (ok) {
            auto out = string_product({ u"" }, nums, [](std::u16string const&, std::vector<NumArg> const& a) {
                std::u16string s;
                for (auto const& d : a)
                    s += static_cast<char16_t>(js::to_uint32(d.value_or(NAN)) & 0xffff);
                return s;
            });
            if (out)
                return c.strings(std::move(*out));
        }
        return AbsValue::string(AbsString::top(c.args.size()));
    }
    if (name == "charAt")
        return string_method(c, 1, char_at);
    if (name == "charCodeAt")
        return number_method(c, 1, [](std::u16string const& s, std::vector<NumArg> const& a) {
            double pos = to_integer(a[0].value_or(0));
            if (pos < 0 || pos >= static_cast<double>(s.size()))
                return static_cast<double>(NAN);
            return static_cast<double>(s[static_cast<size_t>(pos)]);
        });
    if (name == "indexOf" || name == "lastIndexOf") {
        AbsString self = c.this_string();
        auto strs = str_values(self);
        auto search = str_values(domain::to_string(c.arg(0), k));
        auto pos = num_args(c.arg(1), k);
        if (!strs || !search || !pos || strs->size() * search->size() * pos->size() > max_combinations)
            return AbsValue::number(AbsNumber::top());
        NumSet out;
        bool last = name == "lastIndexOf";
        for (auto const& s : *strs)
            for (auto const& needle : *search)
                for (auto p : *pos) {
                    double len = static_cast<double>(s.size());
                    size_t hit;
                    if (last) {
                        double n = p ? *p : NAN;
                        double start = std::isnan(n) ? len : std::clamp(to_integer(n), 0.0, len);
                        hit = s.rfind(needle, static_cast<size_t>(start));
                    } else {
                        double start = std::clamp(to_integer(p.value_or(0)), 0.0, len);
                        hit = s.find(needle, static_cast<size_t>(start));
                    }
                    out.insert(hit == std::u16string::npos ? -1.0 : static_cast<double>(hit));
                }
        return c.numbers(std::move(out));
    }
    if (name == "substr")
        return string_method(c, 2, substr);
    if (name == "substring")
        return string_method(c, 2, substring);
    if (name == "slice")
        return string_method(c, 2, slice);
    if (name == "toUpperCase" || name == "toLowerCase") {
        AbsString self = c.this_string();
        bool upper = name == "toUpperCase";
        if (auto strs = str_values(self)) {
            if (std::all_of(strs->begin(), strs->end(), ascii_only)) {
                StrSet out;
                for (auto s : *strs) {
                    for (auto& ch : s) {
                        if (upper && ch >= 'a' && ch <= 'z')
                            ch = static_cast<char16_t>(ch - 32);
                        else if (!upper && ch >= 'A' && ch <= 'Z')
                            ch = static_cast<char16_t>(ch + 32);
                    }
                    out.insert(s);
                }
                return c.strings(std::move(out));
            }
        }
        return AbsValue::string(AbsString::top(bound_of(self)));
    }
    if (name == "concat") {
        AbsString acc = c.this_string();
        for (auto const& a : c.args)
            acc = domain::concat(acc, domain::to_string(a, k), k, h.string_cap());
        return AbsValue::string(acc);
    }
    if (name == "split") {
        AbsString self = c.this_string();
        auto strs = str_values(self);
        AbsValue sep_value = c.arg(0);
        std::optional<std::vector<std::optional<std::u16string>>> seps;
        if (sep_value.addrs.empty()) {
            seps.emplace();
            if (sep_value.undef)
                seps->push_back(std::nullopt);
            sep_value.undef = false;
            if (!sep_value.is_bottom()) {
                if (auto v = str_values(domain::to_string(sep_value, k)))
                    seps->insert(seps->end(), v->begin(), v->end());
                else
                    seps.reset();
            }
        }
        auto limits = num_args(c.arg(1), k);
        Address arr = c.new_object(ObjClass::Array, "Array.prototype");
        if (strs && seps && limits && strs->size() * seps->size() * limits->size() <= 8) {
            std::vector<std::vector<std::u16string>> results;
            bool small = true;
            for (auto const& s : *strs)
                for (auto const& sep : *seps)
                    for (auto l : *limits) {
                        uint32_t limit = l ? js::to_uint32(*l) : 0xffffffffu;
                        results.push_back(split_string(s, sep, limit));
                        small = small && results.back().size() <= max_exact_array;
                    }
            if (small) {
                size_t longest = 0;
                NumSet lengths;
                for (auto const& r : results) {
                    longest = std::max(longest, r.size());
                    lengths.insert(static_cast<double>(r.size()));
                }
                AbstractObject& obj = h.mutate(arr);
                for (size_t i = 0; i < longest; ++i) {
                    StrSet vals;
                    bool everywhere = true;
                    for (auto const& r : results) {
                        if (i < r.size())
                            vals.insert(r[i]);
                        else
                            everywhere = false;
                    }
                    domain::Property prop { AbsValue::string(AbsString::of(std::move(vals), k)), everywhere };
                    obj.properties[js::number_to_u16string(static_cast<double>(i))] = std::move(prop);
                }
                obj.internal_length = AbsNumber::of(std::move(lengths), k);
                return AbsValue::address(arr);
            }
        }
        AbstractObject& obj = h.mutate(arr);
        obj.default_field = AbsValue::string(AbsString::top(bound_of(self)));
        obj.internal_length = AbsNumber::top();
        return AbsValue::address(arr);
    }
    if (name == "replace") {
        AbsString self = c.this_string();
        AbsValue pattern = c.arg(0);
        AbsValue repl_value = c.arg(1);
        AbsString repl;
        bool dynamic = false;
        if (!repl_value.addrs.empty()) {
            bool callable = false;
            for (Address a : repl_value.addrs)
                if (auto const* obj = h.object(a); obj && (obj->cls == ObjClass::Function || obj->cls == ObjClass::Builtin))
                    callable = true;
            if (callable) {
                AbsValue r = h.call(repl_value, AbsValue::undefined(),
                                    { AbsValue::string(AbsString::top()), AbsValue::number(AbsNumber::top()),
                                      AbsValue::string(self) });
                repl = domain::to_string(r, k);
                dynamic = true;
            }
        }
        if (!dynamic)
            repl = domain::to_string(repl_value, k);
        auto strs = str_values(self);
        auto repls = str_values(repl);
        std::optional<std::vector<std::u16string>> needles;
        if (pattern.addrs.empty())
            needles = str_values(domain::to_string(pattern, k));
        if (strs && repls && needles && !dynamic
            && strs->size() * repls->size() * needles->size() <= max_combinations) {
            StrSet out;
            for (auto const& s : *strs)
                for (auto const& needle : *needles)
                    for (auto const& r : *repls) {
                        size_t hit = s.find(needle);
                        if (hit == std::u16string::npos)
                            out.insert(s);
                        else
                            out.insert(s.substr(0, hit) + substitute(s, hit, needle, r) + s.substr(hit + needle.size()));
                    }
            return c.strings(std::move(out));
        }
        uint64_t sb = bound_of(self);
        uint64_t rb = bound_of(repl);
        bool dollars = !repls || std::any_of(repls->begin(), repls->end(),
                                             [](auto const& r) { return r.find(u'$') != std::u16string::npos; });
        if (dollars)
            rb = domain::saturating_add(rb, sb);
        // a global pattern may fire once per code unit
        uint64_t bound = pattern.addrs.empty() ? domain::saturating_add(sb, rb)
                                               : domain::saturating_add(sb, domain::saturating_mul(sb + 1, rb));
        return AbsValue::string(AbsString::top(bound));
    }
    if (name == "match") {
        AbsString self = name == "match" && c.api.path.find("RegExp") != std::string::npos
                             ? domain::to_string(c.arg(0), k)
                             : c.this_string();
        Address arr = c.new_object(ObjClass::Array, "Array.prototype");
        AbstractObject& obj = h.mutate(arr);
        obj.default_field = AbsValue::string(AbsString::top(bound_of(self)));
        obj.internal_length = AbsNumber::top();
        domain::write_property(obj, AbsString::constant(u"index"), AbsValue::number(AbsNumber::top()), true, k);
        domain::write_property(obj, AbsString::constant(u"input"), AbsValue::string(self), true, k);
        return AbsValue::address(arr).join(AbsValue::null_value(), k);
    }
    if (name == "toFixed") {
        if (c.self.undef || c.self.null)
            h.type_error("number method called on null or undefined");
        return AbsValue::string(AbsString::number_str());
    }
    if (name == "numberToString") {
        if (c.self.undef || c.self.null)
            h.type_error("number method called on null or undefined");
        AbsValue radix = c.arg(0);
        AbsNumber n = domain::to_number(without_nullish(c.self), k);
        if (radix == AbsValue::undefined() || radix == AbsValue::number(10.0))
            return AbsValue::string(domain::to_string(n, k));
        return AbsValue::string(AbsString::top(64));
    }
    if (name == "abs" || name == "floor" || name == "ceil" || name == "round" || name == "sqrt") {
        double (*f)(double) = name == "abs"     ? static_cast<double (*)(double)>(std::fabs)
                              : name == "floor" ? static_cast<double (*)(double)>(std::floor)
                              : name == "ceil"  ? static_cast<double (*)(double)>(std::ceil)
                              : name == "sqrt"  ? static_cast<double (*)(double)>(std::sqrt)
                                                : js_round;
        return AbsValue::number(domain::map_number(domain::to_number(c.arg(0), k), f, k));
    }
    if (name == "max" || name == "min") {
        bool is_max = name == "max";
        AbsNumber acc = AbsNumber::constant(is_max ? -INFINITY : INFINITY);
        for (auto const& a : c.args)
            acc = domain::map_numbers(acc, domain::to_number(a, k), is_max ? js_max : js_min, k);
        return AbsValue::number(acc);
    }
    if (name == "pow")
        return AbsValue::number(
            domain::map_numbers(domain::to_number(c.arg(0), k), domain::to_number(c.arg(1), k), js_pow, k));
    if (name == "Date") {
        if (!c.construct)
            return AbsValue::string(AbsString::top());
        return AbsValue::address(c.new_object(ObjClass::Date, "Date.prototype"));
    }
    if (name == "RegExp") {
        Address a = c.new_object(ObjClass::Regex, "RegExp.prototype");
        AbsValue source = c.arg(0);
        c.set(a, u"source", AbsValue::string(domain::to_string(source, k)));
        c.set(a, u"global", AbsValue::boolean_value(AbsBool::top()));
        c.set(a, u"lastIndex", AbsValue::number(0.0));
        return AbsValue::address(a);
    }
    if (name == "Error") {
        Address a = c.new_object(ObjClass::Error, "Error.prototype");
        AbsValue msg = c.arg(0);
        if (!(msg == AbsValue::undefined())) {
            AbsValue m = AbsValue::string(domain::to_string(without_nullish(msg), k));
            if (msg.undef)
                m = m.join(AbsValue::string(u"Error"), k);
            c.set(a, u"message", m);
        }
        return AbsValue::address(a);
    }
    if (name == "timer")
        return AbsValue::address(c.new_object(ObjClass::Plain, "Object.prototype"));
    if (name == "getField") {
        ModelEnvironment const& env = h.environment();
        if (!env.fields_known) {
            auto it = env.fields.find("*");
            return it == env.fields.end() ? AbsValue::null_value() : AbsValue::address(it->second);
        }
        AbsValue out = AbsValue::null_value();
        auto names = str_values(domain::to_string(c.arg(0), k));
        for (auto const& [field, addr] : env.fields) {
            if (!names || std::find(names->begin(), names->end(), js::utf8_to_utf16(field)) != names->end())
                out = out.join(AbsValue::address(addr), k);
        }
        if (names && std::all_of(names->begin(), names->end(), [&](std::u16string const& n) {
                return env.fields.count(js::utf16_to_utf8(n)) > 0;
            }))
            out.null = false;
        return out;
    }
    if (name == "getAnnot") {
        AbsValue out = AbsValue::null_value();
        if (auto a = h.environment().object("@Annot"))
            out = out.join(AbsValue::address(*a), k);
        return out;
    }
    if (name == "resolveNode") {
        AbsValue out = AbsValue::null_value();
        for (Address a : h.environment().xfa_nodes)
            out = out.join(AbsValue::address(a), k);
        return out;
    }
    return array_method(c, name);
}

AbsValue array_method(Call const& c, std::string_view name)
{
    Host& h = c.h;
    size_t k = c.k;

    if (name == "Array") {
        Address a = c.new_object(ObjClass::Array, "Array.prototype");
        if (c.args.size() == 1 && c.args[0].str.is_bottom() && c.args[0].boolean.is_bottom()
            && c.args[0].addrs.empty() && !c.args[0].undef && !c.args[0].null) {
            AbsNumber n = c.args[0].num;
            if (n.is_set() && std::any_of(n.values().begin(), n.values().end(),
                                          [](double d) { return js::to_uint32(d) != d; }))
                h.type_error("invalid array length");
            h.mutate(a).internal_length = domain::filter_numbers(n, [](double d) { return js::to_uint32(d) == d; });
            if (h.mutate(a).internal_length.is_top())
                h.mutate(a).internal_length = AbsNumber::top();
            h.note_array(a);
            return AbsValue::address(a);
        }
        if (c.args.size() == 1 && !c.args[0].num.is_bottom()) {
            // a number or a single item: length is unknown
            AbstractObject& obj = h.mutate(a);
            obj.default_field = c.args[0];
            obj.internal_length = AbsNumber::top();
            h.note_array(a);
            return AbsValue::address(a);
        }
        for (size_t i = 0; i < c.args.size(); ++i)
            c.set(a, js::number_to_u16string(static_cast<double>(i)), c.args[i]);
        h.mutate(a).internal_length = AbsNumber::constant(static_cast<double>(c.args.size()));
        h.note_array(a);
        return AbsValue::address(a);
    }

    if (c.self.undef || c.self.null)
        h.type_error("array method called on null or undefined");
    bool strong = c.self.addrs.size() == 1;
    AbsValue result;
    AbsValue all_args;
    for (auto const& a : c.args)
        all_args = all_args.join(a, k);

    for (Address addr : c.self.addrs) {
        AbstractObject const* view = h.object(addr);
        if (!view)
            continue;
        if (view->cls != ObjClass::Array) {
            // generic use on array-likes
            AbstractObject& obj = h.mutate(addr);
            if (name == "push" || name == "unshift")
                domain::write_property(obj, AbsString::number_str(), all_args, false, k);
            if (name == "join")
                result = result.join(AbsValue::string(AbsString::top()), k);
            else if (name == "reverse" || name == "sort")
                result = result.join(AbsValue::address(addr), k);
            else
                result = result.join(AbsValue::top_primitive(), k);
            continue;
        }
        AbsNumber len = view->internal_length;
        auto n = len.single();

        if (name == "push") {
            AbstractObject& obj = h.mutate(addr);
            if (n && *n + static_cast<double>(c.args.size()) < 4294967295.0) {
                for (size_t i = 0; i < c.args.size(); ++i)
                    domain::write_property(obj, AbsString::constant(js::number_to_u16string(*n + static_cast<double>(i))),
                                           c.args[i], strong, k);
                if (!strong || obj.summary)
                    obj.internal_length = len.join(AbsNumber::constant(*n + static_cast<double>(c.args.size())), k);
            } else if (!c.args.empty()) {
                domain::write_property(obj, AbsString::number_str(), all_args, false, k);
                obj.internal_length = AbsNumber::top();
            }
            result = result.join(AbsValue::number(obj.internal_length), k);
            h.note_array(addr);
        } else if (name == "pop" || name == "shift") {
            bool pop = name == "pop";
            AbstractObject& obj = h.mutate(addr);
            AbsValue item;
            if (n) {
                if (*n == 0) {
                    item = AbsValue::undefined();
                } else {
                    std::u16string key = pop ? js::number_to_u16string(*n - 1) : std::u16string(u"0");
                    auto m = domain::property_match(obj, AbsString::constant(key), k);
                    item = m.may_be_absent ? m.value.join(AbsValue::undefined(), k) : m.value;
                }
            } else {
                auto m = domain::property_match(obj, pop ? AbsString::number_str() : AbsString::constant(u"0"), k);
                item = m.value.join(AbsValue::undefined(), k);
            }
            result = result.join(item, k);
            if (n && *n == 0)
                continue;
            if (pop && n && strong && !obj.summary) {
                obj.properties.erase(js::number_to_u16string(*n - 1));
                obj.internal_length = AbsNumber::constant(*n - 1);
            } else if (pop) {
                for (auto& [key, prop] : obj.properties) {
                    auto idx = domain::array_index(key);
                    if (idx && (!len.is_set() || len.contains(*idx + 1.0)))
                        prop.definite = false;
                }
                AbsNumber shorter = shift_length(len, -1, k);
                obj.internal_length = strong && !obj.summary ? shorter : len.join(shorter, k);
            } else {
                scramble_indices(obj, {}, k);
                AbsNumber shorter = shift_length(len, -1, k);
                obj.internal_length = strong && !obj.summary ? shorter : len.join(shorter, k);
            }
        } else if (name == "unshift") {
            AbstractObject& obj = h.mutate(addr);
            scramble_indices(obj, all_args, k);
            AbsNumber longer = shift_length(len, static_cast<double>(c.args.size()), k);
            obj.internal_length = strong && !obj.summary ? longer : len.join(longer, k);
            result = result.join(AbsValue::number(obj.internal_length), k);
            h.note_array(addr);
        } else if (name == "reverse" || name == "sort") {
            AbstractObject& obj = h.mutate(addr);
            AbsValue items = index_union(obj, k);
            scramble_indices(obj, {}, k);
            if (name == "sort" && !c.arg(0).addrs.empty())
                h.call(c.arg(0), AbsValue::undefined(),
                       { items.join(AbsValue::undefined(), k), items.join(AbsValue::undefined(), k) });
            result = result.join(AbsValue::address(addr), k);
        } else if (name == "join") {
            AbsValue sep_value = c.arg(0);
            AbsString sep = sep_value == AbsValue::undefined() ? AbsString::constant(u",")
                                                                : domain::to_string(sep_value, k);
            auto item_string = [&](AbsValue v) {
                bool nullish = v.undef || v.null;
                AbsString s = domain::to_string(without_nullish(v), k);
                return nullish ? s.join(AbsString::constant(u""), k) : s;
            };
            if (n && *n <= max_exact_array) {
                AbsString acc = AbsString::constant(u"");
                for (uint32_t i = 0; i < *n; ++i) {
                    if (i > 0)
                        acc = domain::concat(acc, sep, k, h.string_cap());
                    auto m = domain::property_match(*view, AbsString::constant(js::number_to_u16string(i)), k);
                    AbsValue v = m.may_be_absent ? m.value.join(AbsValue::undefined(), k) : m.value;
                    acc = domain::concat(acc, item_string(v), k, h.string_cap());
                }
                result = result.join(AbsValue::string(acc), k);
            } else {
                AbsString items = item_string(index_union(*view, k).join(AbsValue::undefined(), k));
                uint64_t bound = domain::saturating_add(bound_of(items), bound_of(sep));
                if (len.is_set()) {
                    double longest = *std::prev(len.values().end());
                    bound = domain::saturating_mul(static_cast<uint64_t>(std::min(longest, 1e15)), bound);
                }
                result = result.join(AbsValue::string(AbsString::top(bound)), k);
            }
        } else if (name == "arrayConcat" || name == "arraySlice") {
            Address out = c.new_object(ObjClass::Array, "Array.prototype");
            bool splice = c.api.path.find("splice") != std::string::npos;
            bool exact = false;
            if (name == "arraySlice" && n && *n <= max_exact_array) {
                auto a0 = num_args(c.arg(0), k);
                auto a1 = num_args(c.arg(1), k);
                if (a0 && a1 && a0->size() == 1 && a1->size() == 1) {
                    double from = to_integer(a0->front().value_or(0));
                    from = from < 0 ? std::max(*n + from, 0.0) : std::min(from, *n);
                    double to;
                    if (splice) {
                        double del = a1->front() ? to_integer(*a1->front()) : *n - from;
                        to = from + std::clamp(del, 0.0, *n - from);
                    } else {
                        to = a1->front() ? to_integer(*a1->front()) : *n;
                        to = to < 0 ? std::max(*n + to, 0.0) : std::min(to, *n);
                    }
                    AbstractObject copy = *view;
                    AbstractObject& dst = h.mutate(out);
                    uint32_t j = 0;
                    for (double i = from; i < to; ++i, ++j) {
                        auto m = domain::property_match(copy, AbsString::constant(js::number_to_u16string(i)), k);
                        if (!m.value.is_bottom())
                            dst.properties[js::number_to_u16string(j)] = { m.value, !m.may_be_absent };
                    }
                    dst.internal_length = AbsNumber::constant(std::max(0.0, to - from));
                    if (splice) {
                        AbstractObject& src = h.mutate(addr);
                        AbsValue inserted;
                        for (size_t i = 2; i < c.args.size(); ++i)
                            inserted = inserted.join(c.args[i], k);
                        scramble_indices(src, inserted, k);
                        double count = c.args.size() > 2 ? static_cast<double>(c.args.size() - 2) : 0;
                        AbsNumber next = AbsNumber::constant(*n - (to - from) + count);
                        src.internal_length = strong && !src.summary ? next : len.join(next, k);
                    }
                    exact = true;
                }
            } else if (name == "arrayConcat" && n) {
                AbstractObject& dst = h.mutate(out);
                AbstractObject copy = *view;
                double at = 0;
                auto append_array = [&](AbstractObject const& src, double count) {
                    for (double i = 0; i < count; ++i, ++at) {
                        auto m = domain::property_match(src, AbsString::constant(js::number_to_u16string(i)), k);
                        if (!m.value.is_bottom())
                            dst.properties[js::number_to_u16string(at)] = { m.value, !m.may_be_absent };
                    }
                };
                exact = *n <= max_exact_array;
                if (exact)
                    append_array(copy, *n);
                for (size_t i = 0; exact && i < c.args.size(); ++i) {
                    AbsValue const& v = c.args[i];
                    if (v.addrs.empty()) {
                        dst.properties[js::number_to_u16string(at++)] = { v, true };
                        continue;
                    }
                    AbstractObject const* other = v.addrs.size() == 1 && !v.has_primitive() ? h.object(*v.addrs.begin())
                                                                                            : nullptr;
                    if (other && other->cls != ObjClass::Array) {
                        dst.properties[js::number_to_u16string(at++)] = { v, true };
                        continue;
                    }
                    auto count = other ? other->internal_length.single() : std::nullopt;
                    if (!count || *count > max_exact_array) {
                        exact = false;
                        break;
                    }
                    AbstractObject src = *other;
                    append_array(src, *count);
                }
                if (exact)
                    dst.internal_length = AbsNumber::constant(at);
                else
                    dst.properties.clear();
            }
            if (!exact) {
                AbsValue items = index_union(*h.object(addr), k);
                for (auto const& a : c.args) {
                    items = items.join(a, k);
                    for (Address other : a.addrs)
                        if (auto const* o = h.object(other); o && o->cls == ObjClass::Array)
                            items = items.join(index_union(*o, k), k);
                }
                AbstractObject& dst = h.mutate(out);
                dst.default_field = items.join(AbsValue::undefined(), k);
                dst.internal_length = AbsNumber::top();
                if (splice) {
                    AbstractObject& src = h.mutate(addr);
                    scramble_indices(src, all_args, k);
                    src.internal_length = AbsNumber::top();
                }
            }
            result = result.join(AbsValue::address(out), k);
        } else {
            result = result.join(AbsValue::top_primitive(), k);
        }
    }
    if (c.self.has_primitive() && !c.self.addrs.empty())
        result = result.join(AbsValue::top_primitive(), k);
    return result;
}

}

std::u16string unescape_string(std::u16string_view s)
{
    std::u16string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        char16_t c = s[i];
        if (c == '%') {
            if (i + 5 < s.size() && s[i + 1] == 'u') {
                int a = hex_digit(s[i + 2]), b = hex_digit(s[i + 3]), d = hex_digit(s[i + 4]), e = hex_digit(s[i + 5]);
                if (a >= 0 && b >= 0 && d >= 0 && e >= 0) {
                    out += static_cast<char16_t>((a << 12) | (b << 8) | (d << 4) | e);
                    i += 5;
                    continue;
                }
            }
            if (i + 2 < s.size()) {
                int a = hex_digit(s[i + 1]), b = hex_digit(s[i + 2]);
                if (a >= 0 && b >= 0) {
                    out += static_cast<char16_t>((a << 4) | b);
                    i += 2;
                    continue;
                }
            }
        }
        out += c;
    }
    return out;
}

std::u16string escape_string(std::u16string_view s)
{
    static constexpr char hex[] = "0123456789ABCDEF";
    std::u16string out;
    for (char16_t c : s) {
        bool plain = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '@'
                     || c == '*' || c == '_' || c == '+' || c == '-' || c == '.' || c == '/';
        if (plain) {
            out += c;
        } else if (c < 256) {
            out += u'%';
            out += static_cast<char16_t>(hex[c >> 4]);
            out += static_cast<char16_t>(hex[c & 15]);
        } else {
            out += u"%u";
            for (int shift = 12; shift >= 0; shift -= 4)
                out += static_cast<char16_t>(hex[(c >> shift) & 15]);
        }
    }
    return out;
}

AbsValue dispatch_api(ApiInfo const& api, Host& host, AbsValue const& this_value, std::vector<AbsValue> const& args,
                      bool construct)
{
    host.log_api(api, args);
    AbsValue result;
    if (api.builtin.empty()) {
        result = api.result;
        if (construct && !result.only_addresses()) {
            Address a = host.allocate(ObjClass::Plain, "Object.prototype");
            result = AbsValue::address(a);
        }
    } else {
        Call c { api, host, this_value, args, construct, host.k() };
        result = run(c);
    }
    if (!result.str.is_bottom())
        host.note_string(result.str);
    return result;
}

}
