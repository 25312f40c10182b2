// SPDX-License-Identifier: Apache-2.0
#include "safepdf/js/number.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>

namespace safepdf::js {

std::string number_to_string(double value)
{
    if (std::isnan(value))
        return "NaN";
    if (value == 0)
        return "0";
    if (std::isinf(value))
        return value < 0 ? "-Infinity" : "Infinity";
    if (value < 0)
        return "-" + number_to_string(-value);

    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::scientific);
    std::string_view sci(buf, static_cast<size_t>(res.ptr - buf));
    size_t e_pos = sci.find('e');
    std::string digits;
    for (char c : sci.substr(0, e_pos)) {
        if (c != '.')
            digits.push_back(c);
    }
    while (digits.size() > 1 && digits.back() == '0')
        digits.pop_back();
    int exponent = std::atoi(std::string(sci.substr(e_pos + 1)).c_str());
    int k = static_cast<int>(digits.size());
    int n = exponent + 1;

    std::string out;
    if (k <= n && n <= 21) {
        out = digits + std::string(static_cast<size_t>(n - k), '0');
    } else if (0 < n && n <= 21) {
        out = digits.substr(0, static_cast<size_t>(n)) + "." + digits.substr(static_cast<size_t>(n));
    } else if (-6 < n && n <= 0) {
        out = "0." + std::string(static_cast<size_t>(-n), '0') + digits;
    } else {
        int e = n - 1;
        std::string exp = (e < 0 ? "-" : "+") + std::to_string(std::abs(e));
        if (k == 1)
            out = digits + "e" + exp;
        else
            out = digits.substr(0, 1) + "." + digits.substr(1) + "e" + exp;
    }
    return out;
}

std::u16string number_to_u16string(double value)
{
    std::string s = number_to_string(value);
    return std::u16string(s.begin(), s.end());
}

bool is_js_line_terminator(char16_t c) { return c == 0x0A || c == 0x0D || c == 0x2028 || c == 0x2029; }

bool is_js_whitespace(char16_t c)
{
    switch (c) {
    case 0x09:
    case 0x0B:
    case 0x0C:
    case 0x20:
    case 0xA0:
    case 0xFEFF:
    case 0x1680:
    case 0x180E:
    case 0x202F:
    case 0x205F:
    case 0x3000: return true;
    default: return c >= 0x2000 && c <= 0x200A;
    }
}

double string_to_number(std::u16string_view text)
{
    auto is_space = [](char16_t c) { return is_js_whitespace(c) || is_js_line_terminator(c); };
    while (!text.empty() && is_space(text.front()))
        text.remove_prefix(1);
    while (!text.empty() && is_space(text.back()))
        text.remove_suffix(1);
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (text.empty())
        return 0;
    if (text.size() > 2 && text[0] == u'0' && (text[1] == u'x' || text[1] == u'X')) {
        double v = 0;
        for (char16_t c : text.substr(2)) {
            int d = c >= u'0' && c <= u'9' ? c - u'0'
                : c >= u'a' && c <= u'f'   ? c - u'a' + 10
                : c >= u'A' && c <= u'F'   ? c - u'A' + 10
                                           : -1;
            if (d < 0)
                return nan;
            v = v * 16 + d;
        }
        return v;
    }
    std::string ascii;
    size_t i = 0;
    bool negative = false;
    if (text[0] == u'+' || text[0] == u'-') {
        negative = text[0] == u'-';
        i = 1;
    }
    std::u16string_view rest = text.substr(i);
    if (rest == u"Infinity")
        return negative ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
    size_t int_digits = 0, frac_digits = 0;
    size_t p = 0;
    while (p < rest.size() && rest[p] >= u'0' && rest[p] <= u'9') {
        ++p;
        ++int_digits;
    }
    if (p < rest.size() && rest[p] == u'.') {
        ++p;
        while (p < rest.size() && rest[p] >= u'0' && rest[p] <= u'9') {
            ++p;
            ++frac_digits;
        }
    }
    if (int_digits + frac_digits == 0)
        return nan;
    if (p < rest.size() && (rest[p] == u'e' || rest[p] == u'E')) {
        ++p;
        if (p < rest.size() && (rest[p] == u'+' || rest[p] == u'-'))
            ++p;
        size_t exp_digits = 0;
        while (p < rest.size() && rest[p] >= u'0' && rest[p] <= u'9') {
            ++p;
            ++exp_digits;
        }
        if (exp_digits == 0)
            return nan;
    }
    if (p != rest.size())
        return nan;
    for (char16_t c : rest)
        ascii.push_back(static_cast<char>(c));
    double v = std::strtod(ascii.c_str(), nullptr);
    return negative ? -v : v;
}

uint32_t to_uint32(double value)
{
    if (!std::isfinite(value) || value == 0)
        return 0;
    double t = std::trunc(value);
    double m = std::fmod(t, 4294967296.0);
    if (m < 0)
        m += 4294967296.0;
    return static_cast<uint32_t>(m);
}

int32_t to_int32(double value) { return static_cast<int32_t>(to_uint32(value)); }

}
