// SPDX-License-Identifier: Apache-2.0
#include "safepdf/js/ast.hpp"
#include "safepdf/js/number.hpp"

#include <algorithm>
#include <cmath>

namespace safepdf::js {

namespace {

constexpr std::u16string_view reserved_words[] = {
    u"break", u"case", u"catch", u"continue", u"debugger", u"default", u"delete", u"do", u"else",
    u"finally", u"for", u"function", u"if", u"in", u"instanceof", u"new", u"return", u"switch",
    u"this", u"throw", u"try", u"typeof", u"var", u"void", u"while", u"with", u"null",
    u"true", u"false", u"class", u"const", u"enum", u"export", u"extends", u"import", u"super",
};

bool is_reserved(std::u16string_view s)
{
    return std::find(std::begin(reserved_words), std::end(reserved_words), s) != std::end(reserved_words);
}

bool is_plain_identifier(std::u16string_view s)
{
    if (s.empty())
        return false;
    for (size_t i = 0; i < s.size(); ++i) {
        char16_t c = s[i];
        bool ok = (c >= u'a' && c <= u'z') || (c >= u'A' && c <= u'Z') || c == u'$' || c == u'_'
            || (i > 0 && c >= u'0' && c <= u'9');
        if (!ok)
            return false;
    }
    return true;
}

void append_hex4(std::u16string& out, char16_t c)
{
    static constexpr char digits[] = "0123456789abcdef";
    out += u"\\u";
    for (int shift = 12; shift >= 0; shift -= 4)
        out.push_back(static_cast<char16_t>(digits[(c >> shift) & 0xF]));
}

std::u16string quote(std::u16string_view s)
{
    std::u16string out = u"\"";
    for (char16_t c : s) {
        switch (c) {
        case u'"': out += u"\\\""; break;
        case u'\\': out += u"\\\\"; break;
        case u'\n': out += u"\\n"; break;
        case u'\r': out += u"\\r"; break;
        case u'\t': out += u"\\t"; break;
        default:
            if (c < 0x20 || c > 0x7E)
                append_hex4(out, c);
            else
                out.push_back(c);
        }
    }
    out.push_back(u'"');
    return out;
}

// Identifier text as source: raw when it lexes back to the same name.
std::u16string identifier(std::u16string_view name)
{
    if (!is_reserved(name))
        return std::u16string(name);
    std::u16string out;
    append_hex4(out, name[0]);
    out += name.substr(1);
    return out;
}

std::u16string number_literal(double v)
{
    if (std::isinf(v))
        return u"1e999";
    return number_to_u16string(v);
}

class Printer {
public:
    std::u16string out;

    void statement(Node const& n, int indent)
    {
        pad(indent);
        statement_inline(n, indent);
        out.push_back(u'\n');
    }

    std::u16string expr(Node const& n)
    {
        switch (n.kind) {
        case NodeKind::Identifier: return identifier(n.text);
        case NodeKind::Number: return number_literal(n.number);
        case NodeKind::String: return quote(n.text);
        case NodeKind::Boolean: return n.flag ? u"true" : u"false";
        case NodeKind::Null: return u"null";
        case NodeKind::This: return u"this";
        case NodeKind::Regex: return u"/" + n.text + u"/" + n.extra;
        case NodeKind::Array: {
            std::u16string s = u"[";
            for (size_t i = 0; i < n.items.size(); ++i) {
                if (i)
                    s += u", ";
                if (n.items[i])
                    s += operand(*n.items[i]);
            }
            if (!n.items.empty() && !n.items.back())
                s += u",";
            return s + u"]";
        }
        case NodeKind::Object: {
            std::u16string s = u"{";
            for (size_t i = 0; i < n.items.size(); ++i) {
                Node const& p = *n.items[i];
                s += i ? u", " : u"";
                std::u16string key = is_plain_identifier(p.text) ? p.text : quote(p.text);
                if (p.op == Op::Init) {
                    s += key + u": " + operand(*p.a);
                } else {
                    s += (p.op == Op::Get ? u"get " : u"set ") + key;
                    s += function_tail(*p.a);
                }
            }
            return s + u"}";
        }
        case NodeKind::Function:
            return u"function" + (n.text.empty() ? std::u16string() : u" " + identifier(n.text)) + function_tail(n);
        case NodeKind::Unary: return ascii(op_text(n.op)) + u" " + operand(*n.a);
        case NodeKind::Update:
            return n.flag ? ascii(op_text(n.op)) + operand(*n.a) : operand(*n.a) + ascii(op_text(n.op));
        case NodeKind::Binary:
        case NodeKind::Logical: return operand(*n.a) + u" " + ascii(op_text(n.op)) + u" " + operand(*n.b);
        case NodeKind::Assign:
            return operand(*n.a) + u" " + ascii(op_text(n.assign_op)) + u"= " + operand(*n.b);
        case NodeKind::Conditional:
            return operand(*n.a) + u" ? " + operand(*n.b) + u" : " + operand(*n.c);
        case NodeKind::Call: return chain_operand(*n.a) + arguments(n.items);
        case NodeKind::New: {
            bool plain = n.a->kind == NodeKind::Identifier || n.a->kind == NodeKind::This;
            return u"new " + (plain ? expr(*n.a) : u"(" + expr(*n.a) + u")") + arguments(n.items);
        }
        case NodeKind::Member: return chain_operand(*n.a) + u"." + n.text;
        case NodeKind::Index: return chain_operand(*n.a) + u"[" + expr(*n.b) + u"]";
        case NodeKind::Sequence: {
            std::u16string s;
            for (size_t i = 0; i < n.items.size(); ++i)
                s += (i ? u", " : u"") + operand(*n.items[i]);
            return s;
        }
        default: return u"/* statement */";
        }
    }

private:
    static std::u16string ascii(std::string_view s) { return std::u16string(s.begin(), s.end()); }

    void pad(int indent) { out.append(static_cast<size_t>(indent) * 2, u' '); }

    static bool is_primary(Node const& n)
    {
        switch (n.kind) {
        case NodeKind::Identifier:
        case NodeKind::Number:
        case NodeKind::String:
        case NodeKind::Boolean:
        case NodeKind::Null:
        case NodeKind::This:
        case NodeKind::Regex:
        case NodeKind::Array:
        case NodeKind::Object: return true;
        default: return false;
        }
    }

    std::u16string operand(Node const& n) { return is_primary(n) ? expr(n) : u"(" + expr(n) + u")"; }

    // Object of a member access or callee of a call.
    std::u16string chain_operand(Node const& n)
    {
        switch (n.kind) {
        case NodeKind::Identifier:
        case NodeKind::This:
        case NodeKind::Member:
        case NodeKind::Index:
        case NodeKind::Call: return expr(n);
        default: return u"(" + expr(n) + u")";
        }
    }

    std::u16string arguments(std::vector<NodePtr> const& args)
    {
        std::u16string s = u"(";
        for (size_t i = 0; i < args.size(); ++i)
            s += (i ? u", " : u"") + operand(*args[i]);
        return s + u")";
    }

    std::u16string function_tail(Node const& fn)
    {
        std::u16string s = u"(";
        for (size_t i = 0; i < fn.params.size(); ++i)
            s += (i ? u", " : u"") + identifier(fn.params[i]);
        s += u") {";
        Printer inner;
        for (auto const& stmt : fn.items)
            inner.statement(*stmt, 0);
        if (!inner.out.empty())
            s += u"\n" + inner.out;
        return s + u"}";
    }

    void body(Node const& n, int indent)
    {
        if (n.kind == NodeKind::Block) {
            out.push_back(u' ');
            statement_inline(n, indent);
        } else {
            out.push_back(u'\n');
            pad(indent + 1);
            statement_inline(n, indent + 1);
        }
    }

    void block_items(std::vector<NodePtr> const& items, int indent)
    {
        out += u"{\n";
        for (auto const& stmt : items)
            statement(*stmt, indent + 1);
        pad(indent);
        out += u"}";
    }

    void var_decl(Node const& n)
    {
        out += n.flag ? u"const " : u"var ";
        for (size_t i = 0; i < n.items.size(); ++i) {
            Node const& d = *n.items[i];
            out += (i ? u", " : u"") + identifier(d.text);
            if (d.a)
                out += u" = " + operand(*d.a);
        }
    }

    void statement_inline(Node const& n, int indent)
    {
        switch (n.kind) {
        case NodeKind::VarDecl:
            var_decl(n);
            out += u";";
            break;
        case NodeKind::FunctionDecl: out += u"function " + identifier(n.text) + function_tail(n); break;
        case NodeKind::ExprStmt: out += u"(" + expr(*n.a) + u");"; break;
        case NodeKind::Block: block_items(n.items, indent); break;
        case NodeKind::If:
            out += u"if (" + expr(*n.a) + u")";
            body(*n.b, indent);
            if (n.c) {
                out += n.b->kind == NodeKind::Block ? u" " : u"\n";
                if (n.b->kind != NodeKind::Block)
                    pad(indent);
                out += u"else";
                body(*n.c, indent);
            }
            break;
        case NodeKind::While:
            out += u"while (" + expr(*n.a) + u")";
            body(*n.b, indent);
            break;
        case NodeKind::DoWhile:
            out += u"do";
            body(*n.a, indent);
            out += u"\n";
            pad(indent);
            out += u"while (" + expr(*n.b) + u");";
            break;
        case NodeKind::For:
            out += u"for (";
            if (n.a) {
                if (n.a->kind == NodeKind::VarDecl)
                    var_decl(*n.a);
                else
                    out += operand(*n.a);
            }
            out += u"; ";
            if (n.b)
                out += expr(*n.b);
            out += u"; ";
            if (n.c)
                out += expr(*n.c);
            out += u")";
            body(*n.d, indent);
            break;
        case NodeKind::ForIn:
            out += u"for (";
            if (n.a->kind == NodeKind::VarDecl)
                var_decl(*n.a);
            else
                out += operand(*n.a);
            out += u" in " + expr(*n.b) + u")";
            body(*n.c, indent);
            break;
        case NodeKind::Return: out += n.a ? u"return " + expr(*n.a) + u";" : u"return;"; break;
        case NodeKind::Break:
            out += n.text.empty() ? u"break;" : u"break " + identifier(n.text) + u";";
            break;
        case NodeKind::Continue:
            out += n.text.empty() ? u"continue;" : u"continue " + identifier(n.text) + u";";
            break;
        case NodeKind::Throw: out += u"throw " + expr(*n.a) + u";"; break;
        case NodeKind::Try:
            out += u"try ";
            statement_inline(*n.a, indent);
            if (n.b) {
                out += u" catch (" + identifier(n.text) + u") ";
                statement_inline(*n.b, indent);
            }
            if (n.c) {
                out += u" finally ";
                statement_inline(*n.c, indent);
            }
            break;
        case NodeKind::Switch:
            out += u"switch (" + expr(*n.a) + u") {\n";
            for (auto const& c : n.items) {
                pad(indent);
                out += c->a ? u"case " + expr(*c->a) + u":\n" : u"default:\n";
                for (auto const& stmt : c->items)
                    statement(*stmt, indent + 1);
            }
            pad(indent);
            out += u"}";
            break;
        case NodeKind::Labeled:
            out += identifier(n.text) + u":";
            body(*n.a, indent);
            break;
        case NodeKind::With:
            out += u"with (" + expr(*n.a) + u")";
            body(*n.b, indent);
            break;
        case NodeKind::Empty: out += u";"; break;
        case NodeKind::Debugger: out += u"debugger;"; break;
        default: out += u"(" + expr(n) + u");"; break;
        }
    }
};

}

std::u16string print_program(Program const& program)
{
    Printer p;
    for (auto const& stmt : program.body)
        p.statement(*stmt, 0);
    return p.out;
}

std::u16string print_node(Node const& node)
{
    Printer p;
    switch (node.kind) {
    case NodeKind::Identifier:
    case NodeKind::Number:
    case NodeKind::String:
    case NodeKind::Boolean:
    case NodeKind::Null:
    case NodeKind::Regex:
    case NodeKind::This:
    case NodeKind::Array:
    case NodeKind::Object:
    case NodeKind::Function:
    case NodeKind::Unary:
    case NodeKind::Update:
    case NodeKind::Binary:
    case NodeKind::Logical:
    case NodeKind::Assign:
    case NodeKind::Conditional:
    case NodeKind::Call:
    case NodeKind::New:
    case NodeKind::Member:
    case NodeKind::Index:
    case NodeKind::Sequence: return p.expr(node);
    default: p.statement(node, 0); return p.out;
    }
}

}
