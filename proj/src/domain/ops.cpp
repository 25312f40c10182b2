// SPDX-License-Identifier: Apache-2.0
#include "safepdf/domain/ops.hpp"

#include "safepdf/js/number.hpp"

#include <cmath>

namespace safepdf::domain {

namespace {

constexpr std::u16string_view numeric_chars = u"0123456789abcdefABCDEFxX.+-IntyN";

bool numeric_char(char16_t c) { return numeric_chars.find(c) != std::u16string_view::npos || js::is_js_whitespace(c) || js::is_js_line_terminator(c); }

bool blank(char16_t c) { return js::is_js_whitespace(c) || js::is_js_line_terminator(c); }

}

bool may_prefix_number(std::u16string_view s)
{
    size_t i = 0;
    while (i < s.size() && blank(s[i]))
        ++i;
    if (i == s.size())
        return true;
    if (std::u16string_view(u"0123456789+-.IN").find(s[i]) == std::u16string_view::npos)
        return false;
    for (; i < s.size(); ++i)
        if (!numeric_char(s[i]))
            return false;
    return true;
}

bool may_suffix_number(std::u16string_view s)
{
    size_t n = s.size();
    while (n > 0 && blank(s[n - 1]))
        --n;
    if (n == 0)
        return true;
    if (std::u16string_view(u"0123456789abcdefABCDEF.yN").find(s[n - 1]) == std::u16string_view::npos)
        return false;
    for (size_t i = 0; i < n; ++i)
        if (!numeric_char(s[i]))
            return false;
    return true;
}

uint64_t saturating_add(uint64_t a, uint64_t b) { return a > unbounded_length - b ? unbounded_length : a + b; }

uint64_t saturating_mul(uint64_t a, uint64_t b)
{
    if (a == 0 || b == 0)
        return 0;
    return a > unbounded_length / b ? unbounded_length : a * b;
}

namespace {

AbsString collect(std::set<std::u16string> results, uint64_t overflow_length, bool overflow_numeric, bool overflow_other,
                  size_t k)
{
    if (overflow_length == 0)
        return AbsString::of(std::move(results), k);
    bool numeric = overflow_numeric, other = overflow_other;
    for (auto const& r : results)
        (is_number_string(r) ? numeric : other) = true;
    auto kind = numeric && other ? AbsString::Kind::Top : numeric ? AbsString::Kind::NumberStr : AbsString::Kind::NotNumberStr;
    return AbsString::category(kind, overflow_length);
}

}

AbsString concat(AbsString const& a, AbsString const& b, size_t k, uint64_t cap)
{
    if (a.is_bottom() || b.is_bottom())
        return {};
    if (a.is_set() && b.is_set()) {
        std::set<std::u16string> results;
        uint64_t overflow = 0;
        bool numeric = false, other = false;
        for (auto const& x : a.values()) {
            for (auto const& y : b.values()) {
                uint64_t len = x.size() + y.size();
                if (len > cap) {
                    overflow = std::max(overflow, len);
                    // only the category matters; skip building huge strings twice
                    std::u16string joined = x + y;
                    (is_number_string(joined) ? numeric : other) = true;
                    continue;
                }
                results.insert(x + y);
            }
        }
        return collect(std::move(results), overflow, numeric, other, k);
    }
    uint64_t bound = saturating_add(a.length_bound(), b.length_bound());
    auto none = [](AbsString const& s, bool (*pred)(std::u16string_view)) {
        if (!s.is_set())
            return false;
        for (auto const& v : s.values())
            if (pred(v))
                return false;
        return true;
    };
    if (none(a, may_prefix_number) || none(b, may_suffix_number))
        return AbsString::not_number_str(bound);
    return AbsString::top(bound);
}

AbsNumber string_lengths(AbsString const& s, size_t k)
{
    if (s.is_bottom())
        return {};
    if (!s.is_set())
        return AbsNumber::top();
    std::set<double, NumberLess> out;
    for (auto const& v : s.values())
        out.insert(static_cast<double>(v.size()));
    return AbsNumber::of(std::move(out), k);
}

AbsNumber map_number(AbsNumber const& a, std::function<double(double)> const& f, size_t k)
{
    if (!a.is_set())
        return a;
    std::set<double, NumberLess> out;
    for (double v : a.values())
        out.insert(f(v));
    return AbsNumber::of(std::move(out), k);
}

AbsNumber map_numbers(AbsNumber const& a, AbsNumber const& b, std::function<double(double, double)> const& f, size_t k)
{
    if (a.is_bottom() || b.is_bottom())
        return {};
    if (a.is_top() || b.is_top())
        return AbsNumber::top();
    std::set<double, NumberLess> out;
    for (double x : a.values())
        for (double y : b.values())
            out.insert(f(x, y));
    return AbsNumber::of(std::move(out), k);
}

AbsString map_string(AbsString const& s, std::function<std::u16string(std::u16string const&)> const& f,
                     AbsString const& fallback, size_t k, uint64_t cap)
{
    if (s.is_bottom())
        return {};
    if (!s.is_set())
        return fallback;
    std::set<std::u16string> results;
    uint64_t overflow = 0;
    bool numeric = false, other = false;
    for (auto const& v : s.values()) {
        std::u16string r = f(v);
        if (r.size() > cap) {
            overflow = std::max<uint64_t>(overflow, r.size());
            (is_number_string(r) ? numeric : other) = true;
            continue;
        }
        results.insert(std::move(r));
    }
    return collect(std::move(results), overflow, numeric, other, k);
}

AbsString remove_string(AbsString const& s, std::u16string_view value)
{
    if (!s.is_set())
        return s;
    return filter_strings(s, [&](std::u16string const& v) { return v != value; });
}

AbsNumber remove_number(AbsNumber const& n, double value)
{
    return filter_numbers(n, [&](double v) { return !(v == value && std::signbit(v) == std::signbit(value)) && !(std::isnan(v) && std::isnan(value)); });
}

AbsString filter_strings(AbsString const& s, std::function<bool(std::u16string const&)> const& keep)
{
    if (!s.is_set())
        return s;
    std::set<std::u16string> out;
    for (auto const& v : s.values())
        if (keep(v))
            out.insert(v);
    return AbsString::of(std::move(out), out.size() + 1);
}

AbsNumber filter_numbers(AbsNumber const& n, std::function<bool(double)> const& keep)
{
    if (!n.is_set())
        return n;
    std::set<double, NumberLess> out;
    for (double v : n.values())
        if (keep(v))
            out.insert(v);
    return AbsNumber::of(std::move(out), out.size() + 1);
}

bool strict_equals(Primitive const& a, Primitive const& b)
{
    if (a.index() != b.index())
        return false;
    if (auto x = std::get_if<double>(&a))
        return *x == std::get<double>(b);
    return a == b;
}

bool loose_equals(Primitive const& a, Primitive const& b)
{
    auto nullish = [](Primitive const& p) { return std::holds_alternative<std::monostate>(p) || std::holds_alternative<std::nullptr_t>(p); };
    if (a.index() == b.index())
        return strict_equals(a, b);
    if (nullish(a) || nullish(b))
        return nullish(a) && nullish(b);
    auto number = [](Primitive const& p) -> double {
        if (auto d = std::get_if<double>(&p))
            return *d;
        if (auto b = std::get_if<bool>(&p))
            return *b ? 1 : 0;
        return js::string_to_number(std::get<std::u16string>(p));
    };
    return number(a) == number(b);
}

}
