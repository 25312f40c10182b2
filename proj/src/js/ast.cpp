// SPDX-License-Identifier: Apache-2.0
#include "safepdf/js/ast.hpp"

#include <cmath>
#include <cstring>

namespace safepdf::js {

std::string_view op_text(Op op)
{
    switch (op) {
    case Op::None: return "";
    case Op::Neg: return "-";
    case Op::Plus: return "+";
    case Op::Not: return "!";
    case Op::BitNot: return "~";
    case Op::Typeof: return "typeof";
    case Op::Void: return "void";
    case Op::Delete: return "delete";
    case Op::Inc: return "++";
    case Op::Dec: return "--";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Mod: return "%";
    case Op::Shl: return "<<";
    case Op::Shr: return ">>";
    case Op::UShr: return ">>>";
    case Op::BitAnd: return "&";
    case Op::BitOr: return "|";
    case Op::BitXor: return "^";
    case Op::Lt: return "<";
    case Op::Gt: return ">";
    case Op::Le: return "<=";
    case Op::Ge: return ">=";
    case Op::Eq: return "==";
    case Op::Ne: return "!=";
    case Op::StrictEq: return "===";
    case Op::StrictNe: return "!==";
    case Op::In: return "in";
    case Op::Instanceof: return "instanceof";
    case Op::And: return "&&";
    case Op::Or: return "||";
    case Op::Assign: return "=";
    case Op::Init: return "init";
    case Op::Get: return "get";
    case Op::Set: return "set";
    }
    return "";
}

namespace {

bool same_number(double x, double y)
{
    if (std::isnan(x) || std::isnan(y))
        return std::isnan(x) && std::isnan(y);
    return std::memcmp(&x, &y, sizeof x) == 0;
}

}

bool structurally_equal(Node const* x, Node const* y)
{
    if (x == y)
        return true;
    if (!x || !y)
        return false;
    if (x->kind != y->kind || x->text != y->text || x->extra != y->extra || !same_number(x->number, y->number)
        || x->op != y->op || x->assign_op != y->assign_op || x->flag != y->flag || x->params != y->params
        || x->items.size() != y->items.size())
        return false;
    if (!structurally_equal(x->a.get(), y->a.get()) || !structurally_equal(x->b.get(), y->b.get())
        || !structurally_equal(x->c.get(), y->c.get()) || !structurally_equal(x->d.get(), y->d.get()))
        return false;
    for (size_t i = 0; i < x->items.size(); ++i) {
        if (!structurally_equal(x->items[i].get(), y->items[i].get()))
            return false;
    }
    return true;
}

std::set<std::u16string> list_entry_functions(Program const& program)
{
    std::set<std::u16string> names;
    for (auto const& stmt : program.body) {
        if (stmt->kind == NodeKind::FunctionDecl)
            names.insert(stmt->text);
    }
    return names;
}

std::u16string utf8_to_utf16(std::string_view utf8)
{
    std::u16string out;
    out.reserve(utf8.size());
    size_t i = 0;
    auto cont = [&](size_t k) { return k < utf8.size() && (static_cast<unsigned char>(utf8[k]) & 0xC0) == 0x80; };
    while (i < utf8.size()) {
        unsigned char b = static_cast<unsigned char>(utf8[i]);
        char32_t cp = 0xFFFD;
        size_t len = 1;
        if (b < 0x80) {
            cp = b;
        } else if (b >= 0xC2 && b <= 0xDF && cont(i + 1)) {
            cp = ((b & 0x1F) << 6) | (utf8[i + 1] & 0x3F);
            len = 2;
        } else if (b >= 0xE0 && b <= 0xEF && cont(i + 1) && cont(i + 2)) {
            char32_t v = ((b & 0x0F) << 12) | ((utf8[i + 1] & 0x3F) << 6) | (utf8[i + 2] & 0x3F);
            if (v >= 0x800 && (v < 0xD800 || v > 0xDFFF)) {
                cp = v;
                len = 3;
            }
        } else if (b >= 0xF0 && b <= 0xF4 && cont(i + 1) && cont(i + 2) && cont(i + 3)) {
            char32_t v = ((b & 0x07) << 18) | ((utf8[i + 1] & 0x3F) << 12) | ((utf8[i + 2] & 0x3F) << 6)
                | (utf8[i + 3] & 0x3F);
            if (v >= 0x10000 && v <= 0x10FFFF) {
                cp = v;
                len = 4;
            }
        }
        if (cp >= 0x10000) {
            cp -= 0x10000;
            out.push_back(static_cast<char16_t>(0xD800 + (cp >> 10)));
            out.push_back(static_cast<char16_t>(0xDC00 + (cp & 0x3FF)));
        } else {
            out.push_back(static_cast<char16_t>(cp));
        }
        i += len;
    }
    return out;
}

std::string utf16_to_utf8(std::u16string_view utf16)
{
    std::string out;
    out.reserve(utf16.size());
    for (size_t i = 0; i < utf16.size(); ++i) {
        char32_t cp = utf16[i];
        if (cp >= 0xD800 && cp <= 0xDBFF && i + 1 < utf16.size() && utf16[i + 1] >= 0xDC00 && utf16[i + 1] <= 0xDFFF) {
            cp = 0x10000 + ((cp - 0xD800) << 10) + (utf16[i + 1] - 0xDC00);
            ++i;
        } else if (cp >= 0xD800 && cp <= 0xDFFF) {
            cp = 0xFFFD;
        }
        if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
        } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else if (cp < 0x10000) {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        } else {
            out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
        }
    }
    return out;
}

}
