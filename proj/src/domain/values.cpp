// SPDX-License-Identifier: Apache-2.0
#include "safepdf/domain/values.hpp"
#include "safepdf/js/ast.hpp"
#include "safepdf/js/number.hpp"

#include <algorithm>
#include <cmath>

namespace safepdf::domain {

namespace {

// Longest ES5 number-to-string image, e.g. "-0.000001234567890123456".
constexpr uint64_t max_number_string_length = 25;

AbsString::Kind category_of(std::set<std::u16string> const& values)
{
    bool any_number = false, any_other = false;
    for (auto const& s : values) {
        if (is_number_string(s))
            any_number = true;
        else
            any_other = true;
    }
    if (any_number && any_other)
        return AbsString::Kind::Top;
    return any_number ? AbsString::Kind::NumberStr : AbsString::Kind::NotNumberStr;
}

uint64_t longest(std::set<std::u16string> const& values)
{
    uint64_t n = 0;
    for (auto const& s : values)
        n = std::max<uint64_t>(n, s.size());
    return n;
}

bool same_number(double a, double b)
{
    NumberLess less;
    return !less(a, b) && !less(b, a);
}

}

bool is_number_string(std::u16string_view s)
{
    return s == u"NaN" || !std::isnan(js::string_to_number(s));
}

// ---- AbsString

AbsString AbsString::constant(std::u16string s)
{
    AbsString r;
    r.kind_ = Kind::Set;
    r.length_bound_ = s.size();
    r.values_.insert(std::move(s));
    return r;
}

AbsString AbsString::of(std::set<std::u16string> values, size_t k)
{
    AbsString r;
    if (values.empty())
        return r;
    r.length_bound_ = longest(values);
    if (values.size() > k) {
        r.kind_ = category_of(values);
        return r;
    }
    r.kind_ = Kind::Set;
    r.values_ = std::move(values);
    return r;
}

AbsString AbsString::category(Kind kind, uint64_t length_bound)
{
    AbsString r;
    if (kind == Kind::Bottom || kind == Kind::Set)
        return r;
    r.kind_ = kind;
    r.length_bound_ = length_bound;
    return r;
}

std::optional<std::u16string> AbsString::single() const
{
    if (kind_ == Kind::Set && values_.size() == 1)
        return *values_.begin();
    return std::nullopt;
}

bool AbsString::contains(std::u16string_view s) const
{
    switch (kind_) {
    case Kind::Bottom: return false;
    case Kind::Set: return values_.count(std::u16string(s)) > 0;
    case Kind::NumberStr: return is_number_string(s);
    case Kind::NotNumberStr: return !is_number_string(s);
    case Kind::Top: return true;
    }
    return false;
}

bool AbsString::all_number_strings() const
{
    switch (kind_) {
    case Kind::Bottom:
    case Kind::NumberStr: return true;
    case Kind::Set: return category_of(values_) == Kind::NumberStr;
    default: return false;
    }
}

bool AbsString::no_number_strings() const
{
    switch (kind_) {
    case Kind::Bottom:
    case Kind::NotNumberStr: return true;
    case Kind::Set: return category_of(values_) == Kind::NotNumberStr;
    default: return false;
    }
}

bool AbsString::leq(AbsString const& other) const
{
    if (kind_ == Kind::Bottom)
        return true;
    if (length_bound_ > other.length_bound_)
        return false;
    switch (other.kind_) {
    case Kind::Bottom: return false;
    case Kind::Top: return true;
    case Kind::Set:
        return kind_ == Kind::Set && std::includes(other.values_.begin(), other.values_.end(), values_.begin(), values_.end());
    case Kind::NumberStr: return kind_ == Kind::NumberStr || (kind_ == Kind::Set && all_number_strings());
    case Kind::NotNumberStr: return kind_ == Kind::NotNumberStr || (kind_ == Kind::Set && no_number_strings());
    }
    return false;
}

AbsString AbsString::join(AbsString const& other, size_t k) const
{
    if (kind_ == Kind::Bottom)
        return other;
    if (other.kind_ == Kind::Bottom)
        return *this;
    uint64_t bound = std::max(length_bound_, other.length_bound_);
    if (kind_ == Kind::Set && other.kind_ == Kind::Set) {
        std::set<std::u16string> all = values_;
        all.insert(other.values_.begin(), other.values_.end());
        return of(std::move(all), k);
    }
    auto kind_of = [](AbsString const& s) { return s.kind_ == Kind::Set ? category_of(s.values_) : s.kind_; };
    Kind a = kind_of(*this), b = kind_of(other);
    return category(a == b ? a : Kind::Top, bound);
}

AbsString AbsString::widen(AbsString const& next, size_t k) const
{
    AbsString j = join(next, k);
    if (kind_ == Kind::Bottom)
        return j;
    if (kind_ == Kind::Set && j.kind_ == Kind::Set && j.values_.size() > values_.size())
        j = category(category_of(j.values_), j.length_bound_);
    if (j.kind_ != Kind::Set && j.length_bound_ > length_bound_)
        j.length_bound_ = unbounded_length;
    return j;
}

AbsString AbsString::with_length_bound(uint64_t bound) const
{
    if (kind_ == Kind::Bottom || kind_ == Kind::Set)
        return *this;
    AbsString r = *this;
    r.length_bound_ = std::max(r.length_bound_, bound);
    return r;
}

// ---- AbsNumber

bool NumberLess::operator()(double a, double b) const
{
    if (std::isnan(a))
        return false;
    if (std::isnan(b))
        return true;
    if (a == b)
        return std::signbit(a) && !std::signbit(b);
    return a < b;
}

AbsNumber AbsNumber::constant(double v)
{
    AbsNumber r;
    r.kind_ = Kind::Set;
    r.values_.insert(v);
    return r;
}

AbsNumber AbsNumber::of(std::set<double, NumberLess> values, size_t k)
{
    AbsNumber r;
    if (values.empty())
        return r;
    if (values.size() > k)
        return top();
    r.kind_ = Kind::Set;
    r.values_ = std::move(values);
    return r;
}

AbsNumber AbsNumber::top()
{
    AbsNumber r;
    r.kind_ = Kind::Top;
    return r;
}

std::optional<double> AbsNumber::single() const
{
    if (kind_ == Kind::Set && values_.size() == 1)
        return *values_.begin();
    return std::nullopt;
}

bool AbsNumber::contains(double v) const
{
    switch (kind_) {
    case Kind::Bottom: return false;
    case Kind::Set: return values_.count(v) > 0;
    case Kind::Top: return true;
    }
    return false;
}

bool AbsNumber::leq(AbsNumber const& other) const
{
    if (kind_ == Kind::Bottom || other.kind_ == Kind::Top)
        return true;
    if (other.kind_ == Kind::Bottom || kind_ == Kind::Top)
        return false;
    return std::includes(other.values_.begin(), other.values_.end(), values_.begin(), values_.end(), NumberLess {});
}

AbsNumber AbsNumber::join(AbsNumber const& other, size_t k) const
{
    if (kind_ == Kind::Bottom)
        return other;
    if (other.kind_ == Kind::Bottom)
        return *this;
    if (kind_ == Kind::Top || other.kind_ == Kind::Top)
        return top();
    auto all = values_;
    all.insert(other.values_.begin(), other.values_.end());
    return of(std::move(all), k);
}

AbsNumber AbsNumber::widen(AbsNumber const& next, size_t k) const
{
    AbsNumber j = join(next, k);
    if (kind_ == Kind::Set && j.kind_ == Kind::Set && j.values_.size() > values_.size())
        return top();
    return j;
}

bool AbsNumber::operator==(AbsNumber const& other) const
{
    if (kind_ != other.kind_ || values_.size() != other.values_.size())
        return false;
    return std::equal(values_.begin(), values_.end(), other.values_.begin(), same_number);
}

std::optional<bool> AbsBool::single() const
{
    if (bits_ == 1)
        return true;
    if (bits_ == 2)
        return false;
    return std::nullopt;
}

// ---- AbsValue

AbsValue AbsValue::undefined()
{
    AbsValue v;
    v.undef = true;
    return v;
}

AbsValue AbsValue::null_value()
{
    AbsValue v;
    v.null = true;
    return v;
}

AbsValue AbsValue::string(AbsString s)
{
    AbsValue v;
    v.str = std::move(s);
    return v;
}

AbsValue AbsValue::number(AbsNumber n)
{
    AbsValue v;
    v.num = std::move(n);
    return v;
}

AbsValue AbsValue::boolean_value(AbsBool b)
{
    AbsValue v;
    v.boolean = b;
    return v;
}

AbsValue AbsValue::address(Address a)
{
    AbsValue v;
    v.addrs.insert(a);
    return v;
}

AbsValue AbsValue::top_primitive()
{
    AbsValue v;
    v.str = AbsString::top();
    v.num = AbsNumber::top();
    v.boolean = AbsBool::top();
    v.undef = v.null = true;
    return v;
}

bool AbsValue::is_bottom() const { return !has_primitive() && addrs.empty(); }

bool AbsValue::has_primitive() const
{
    return !str.is_bottom() || !num.is_bottom() || !boolean.is_bottom() || undef || null;
}

bool AbsValue::leq(AbsValue const& other) const
{
    return str.leq(other.str) && num.leq(other.num) && boolean.leq(other.boolean) && (!undef || other.undef)
        && (!null || other.null) && std::includes(other.addrs.begin(), other.addrs.end(), addrs.begin(), addrs.end());
}

AbsValue AbsValue::join(AbsValue const& other, size_t k) const
{
    AbsValue r;
    r.str = str.join(other.str, k);
    r.num = num.join(other.num, k);
    r.boolean = boolean.join(other.boolean);
    r.undef = undef || other.undef;
    r.null = null || other.null;
    r.addrs = addrs;
    r.addrs.insert(other.addrs.begin(), other.addrs.end());
    return r;
}

AbsValue AbsValue::widen(AbsValue const& next, size_t k) const
{
    AbsValue r = join(next, k);
    r.str = str.widen(next.str, k);
    r.num = num.widen(next.num, k);
    return r;
}

// ---- coercions

AbsString to_string(AbsNumber const& n, size_t k)
{
    switch (n.kind()) {
    case AbsNumber::Kind::Bottom: return {};
    case AbsNumber::Kind::Top: return AbsString::number_str(max_number_string_length);
    case AbsNumber::Kind::Set: {
        std::set<std::u16string> out;
        for (double v : n.values())
            out.insert(js::number_to_u16string(v));
        return AbsString::of(std::move(out), k);
    }
    }
    return {};
}

AbsNumber to_number(AbsString const& s, size_t k)
{
    switch (s.kind()) {
    case AbsString::Kind::Bottom: return {};
    case AbsString::Kind::NotNumberStr: return AbsNumber::constant(std::nan(""));
    case AbsString::Kind::NumberStr:
    case AbsString::Kind::Top: return AbsNumber::top();
    case AbsString::Kind::Set: {
        std::set<double, NumberLess> out;
        for (auto const& v : s.values())
            out.insert(js::string_to_number(v));
        return AbsNumber::of(std::move(out), k);
    }
    }
    return {};
}

AbsNumber to_number(AbsValue const& v, size_t k)
{
    AbsNumber r = v.num.join(to_number(v.str, k), k);
    if (v.boolean.may_true())
        r = r.join(AbsNumber::constant(1), k);
    if (v.boolean.may_false())
        r = r.join(AbsNumber::constant(0), k);
    if (v.undef)
        r = r.join(AbsNumber::constant(std::nan("")), k);
    if (v.null)
        r = r.join(AbsNumber::constant(0), k);
    if (!v.addrs.empty())
        r = AbsNumber::top();
    return r;
}

AbsString to_string(AbsValue const& v, size_t k)
{
    AbsString r = v.str.join(to_string(v.num, k), k);
    if (v.boolean.may_true())
        r = r.join(AbsString::constant(u"true"), k);
    if (v.boolean.may_false())
        r = r.join(AbsString::constant(u"false"), k);
    if (v.undef)
        r = r.join(AbsString::constant(u"undefined"), k);
    if (v.null)
        r = r.join(AbsString::constant(u"null"), k);
    if (!v.addrs.empty())
        r = r.join(AbsString::top(), k);
    return r;
}

AbsBool to_boolean(AbsValue const& v)
{
    AbsBool r = v.boolean;
    switch (v.str.kind()) {
    case AbsString::Kind::Bottom: break;
    case AbsString::Kind::NotNumberStr: r = r.join(AbsBool::constant(true)); break; // "" is a number-string
    case AbsString::Kind::NumberStr:
    case AbsString::Kind::Top: r = AbsBool::top(); break;
    case AbsString::Kind::Set:
        for (auto const& s : v.str.values())
            r = r.join(AbsBool::constant(!s.empty()));
        break;
    }
    switch (v.num.kind()) {
    case AbsNumber::Kind::Bottom: break;
    case AbsNumber::Kind::Top: r = AbsBool::top(); break;
    case AbsNumber::Kind::Set:
        for (double d : v.num.values())
            r = r.join(AbsBool::constant(d != 0 && !std::isnan(d)));
        break;
    }
    if (v.undef || v.null)
        r = r.join(AbsBool::constant(false));
    if (!v.addrs.empty())
        r = r.join(AbsBool::constant(true));
    return r;
}

// ---- rendering

namespace {

void append_quoted(std::string& out, std::u16string_view s)
{
    out.push_back('"');
    for (size_t i = 0; i < s.size(); ++i) {
        char16_t c = s[i];
        bool pair = c >= 0xD800 && c <= 0xDBFF && i + 1 < s.size() && s[i + 1] >= 0xDC00 && s[i + 1] <= 0xDFFF;
        if (pair) {
            out += js::utf16_to_utf8(s.substr(i, 2));
            ++i;
        } else if (c == u'"' || c == u'\\') {
            out.push_back('\\');
            out.push_back(static_cast<char>(c));
        } else if (c < 0x20 || c == 0x7F || (c >= 0xD800 && c <= 0xDFFF)) {
            static constexpr char hex[] = "0123456789abcdef";
            out += "\\u";
            for (int shift = 12; shift >= 0; shift -= 4)
                out.push_back(hex[(c >> shift) & 0xF]);
        } else {
            out += js::utf16_to_utf8(s.substr(i, 1));
        }
    }
    out.push_back('"');
}

std::string render_number(double v)
{
    if (v == 0 && std::signbit(v))
        return "-0";
    return js::number_to_string(v);
}

}

std::string render(AbsString const& s)
{
    switch (s.kind()) {
    case AbsString::Kind::Bottom: return "⊥";
    case AbsString::Kind::NumberStr: return "Number";
    case AbsString::Kind::NotNumberStr: return "NotNumber";
    case AbsString::Kind::Top: return "⊤Str";
    case AbsString::Kind::Set: {
        std::string out;
        for (auto const& v : s.values()) {
            if (!out.empty())
                out.push_back('|');
            append_quoted(out, v);
        }
        return out;
    }
    }
    return "";
}

std::string render(AbsNumber const& n)
{
    switch (n.kind()) {
    case AbsNumber::Kind::Bottom: return "⊥";
    case AbsNumber::Kind::Top: return "⊤Num";
    case AbsNumber::Kind::Set: {
        std::string out;
        for (double v : n.values()) {
            if (!out.empty())
                out.push_back('|');
            out += render_number(v);
        }
        return out;
    }
    }
    return "";
}

std::string render_address(Address a, AddressNamer const* namer)
{
    if (namer && *namer) {
        std::string name = (*namer)(a);
        if (!name.empty())
            return "#" + name;
    }
    if (a.space == AddressSpace::Model)
        return "#m" + std::to_string(a.site);
    std::string out = "#";
    switch (a.space) {
    case AddressSpace::Scope: out += 's'; break;
    case AddressSpace::Proto: out += 'p'; break;
    case AddressSpace::Args: out += 'a'; break;
    case AddressSpace::Native: out += 'n'; break;
    default: break;
    }
    out += std::to_string(a.site);
    if (a.context)
        out += "@" + std::to_string(a.context);
    return out;
}

std::string render(AbsValue const& v, AddressNamer const* namer)
{
    std::vector<std::string> atoms;
    if (!v.str.is_bottom())
        atoms.push_back(render(v.str));
    if (!v.num.is_bottom())
        atoms.push_back(render(v.num));
    if (v.boolean.is_top())
        atoms.push_back("⊤Bool");
    else if (auto b = v.boolean.single())
        atoms.push_back(*b ? "true" : "false");
    if (v.undef)
        atoms.push_back("undef");
    if (v.null)
        atoms.push_back("null");
    std::sort(atoms.begin(), atoms.end());
    std::string out;
    for (Address a : v.addrs) {
        if (!out.empty())
            out += "∪";
        out += render_address(a, namer);
    }
    for (auto const& atom : atoms) {
        if (!out.empty())
            out += "∪";
        out += atom;
    }
    return out.empty() ? "⊥" : out;
}

// ---- parsing

namespace {

std::vector<std::string_view> split_top_level(std::string_view text, std::string_view sep)
{
    std::vector<std::string_view> parts;
    size_t start = 0;
    bool quoted = false;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '\\')
                ++i;
            else if (c == '"')
                quoted = false;
        } else if (c == '"') {
            quoted = true;
        } else if (text.substr(i, sep.size()) == sep) {
            parts.push_back(text.substr(start, i - start));
            start = i + sep.size();
            i = start - 1;
        }
    }
    parts.push_back(text.substr(start));
    return parts;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.remove_suffix(1);
    return s;
}

std::optional<std::u16string> unquote(std::string_view s)
{
    if (s.size() < 2 || s.front() != '"' || s.back() != '"')
        return std::nullopt;
    s = s.substr(1, s.size() - 2);
    std::string utf8;
    std::u16string out;
    auto flush = [&] {
        out += js::utf8_to_utf16(utf8);
        utf8.clear();
    };
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '\\') {
            if (s[i] == '"')
                return std::nullopt;
            utf8.push_back(s[i]);
            continue;
        }
        if (++i >= s.size())
            return std::nullopt;
        char e = s[i];
        if (e == 'u') {
            if (i + 4 >= s.size())
                return std::nullopt;
            unsigned v = 0;
            for (int j = 1; j <= 4; ++j) {
                char h = s[i + j];
                int d = h >= '0' && h <= '9' ? h - '0' : h >= 'a' && h <= 'f' ? h - 'a' + 10 : h >= 'A' && h <= 'F' ? h - 'A' + 10 : -1;
                if (d < 0)
                    return std::nullopt;
                v = v * 16 + static_cast<unsigned>(d);
            }
            flush();
            out.push_back(static_cast<char16_t>(v));
            i += 4;
        } else if (e == 'n') {
            utf8.push_back('\n');
        } else if (e == 't') {
            utf8.push_back('\t');
        } else if (e == 'r') {
            utf8.push_back('\r');
        } else {
            utf8.push_back(e);
        }
    }
    flush();
    return out;
}

std::optional<double> parse_number(std::string_view s)
{
    if (s == "NaN")
        return std::nan("");
    if (s == "-0")
        return -0.0;
    std::u16string u(s.begin(), s.end());
    double v = js::string_to_number(u);
    if (std::isnan(v) || s.empty())
        return std::nullopt;
    return v;
}

std::optional<Address> parse_address(std::string_view s)
{
    if (s.size() < 2 || s[0] != '#')
        return std::nullopt;
    s.remove_prefix(1);
    AddressSpace space = AddressSpace::Program;
    switch (s[0]) {
    case 'm': space = AddressSpace::Model; break;
    case 's': space = AddressSpace::Scope; break;
    case 'p': space = AddressSpace::Proto; break;
    case 'a': space = AddressSpace::Args; break;
    case 'n': space = AddressSpace::Native; break;
    default: break;
    }
    bool model = space == AddressSpace::Model;
    if (space != AddressSpace::Program)
        s.remove_prefix(1);
    uint32_t site = 0, context = 0;
    size_t at = s.find('@');
    auto digits = [](std::string_view d, uint32_t& out) {
        if (d.empty() || d.size() > 9)
            return false;
        out = 0;
        for (char c : d) {
            if (c < '0' || c > '9')
                return false;
            out = out * 10 + static_cast<uint32_t>(c - '0');
        }
        return true;
    };
    if (!digits(s.substr(0, at), site))
        return std::nullopt;
    if (at != std::string_view::npos && (model || !digits(s.substr(at + 1), context)))
        return std::nullopt;
    return Address::of(space, site, context);
}

}

std::optional<AbsValue> parse_value(std::string_view text, size_t k)
{
    text = trim(text);
    AbsValue v;
    if (text == "⊥")
        return v;
    for (auto raw : split_top_level(text, "∪")) {
        std::string_view atom = trim(raw);
        if (atom.empty())
            return std::nullopt;
        if (atom == "Number" || atom == "NumberStr")
            v.str = v.str.join(AbsString::number_str(), k);
        else if (atom == "NotNumber" || atom == "NotNumberStr")
            v.str = v.str.join(AbsString::not_number_str(), k);
        else if (atom == "⊤Str" || atom == "TopStr" || atom == "string:⊤" || atom == "string:T")
            v.str = v.str.join(AbsString::top(), k);
        else if (atom == "⊤Num" || atom == "TopNum" || atom == "number:⊤" || atom == "number:T")
            v.num = AbsNumber::top();
        else if (atom == "⊤Bool" || atom == "TopBool" || atom == "bool:⊤" || atom == "bool:T")
            v.boolean = AbsBool::top();
        else if (atom == "true")
            v.boolean = v.boolean.join(AbsBool::constant(true));
        else if (atom == "false")
            v.boolean = v.boolean.join(AbsBool::constant(false));
        else if (atom == "undef" || atom == "undefined")
            v.undef = true;
        else if (atom == "null")
            v.null = true;
        else if (atom[0] == '#') {
            auto a = parse_address(atom);
            if (!a)
                return std::nullopt;
            v.addrs.insert(*a);
        } else if (atom[0] == '"') {
            std::set<std::u16string> values;
            for (auto part : split_top_level(atom, "|")) {
                auto s = unquote(trim(part));
                if (!s)
                    return std::nullopt;
                values.insert(std::move(*s));
            }
            v.str = v.str.join(AbsString::of(std::move(values), k), k);
        } else {
            std::set<double, NumberLess> values;
            for (auto part : split_top_level(atom, "|")) {
                auto n = parse_number(trim(part));
                if (!n)
                    return std::nullopt;
                values.insert(*n);
            }
            v.num = v.num.join(AbsNumber::of(std::move(values), k), k);
        }
    }
    return v;
}

}
