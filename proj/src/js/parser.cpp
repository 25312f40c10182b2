// SPDX-License-Identifier: Apache-2.0
#include "safepdf/js/ast.hpp"
#include "safepdf/js/number.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>

namespace safepdf::js {

namespace {

struct Pos {
    uint32_t offset = 0;
    uint32_t byte = 0;
    uint32_t line = 1;
    uint32_t column = 1;
};

Span make_span(Pos start, Pos end)
{
    return Span { start.offset, end.offset, start.byte, end.byte, start.line, start.column };
}

struct FatalError {
    Span span;
    std::string message;
};

enum class Tok : uint8_t { Eof, Identifier, Keyword, Punct, Number, String, Regex };

struct Token {
    Tok type = Tok::Eof;
    std::u16string value;
    std::u16string flags; // regex flags
    double number = 0;
    Pos start, end;
    bool newline_before = false;
};

constexpr std::array<std::u16string_view, 36> keywords {
    u"break", u"case",   u"catch",  u"continue", u"debugger", u"default", u"delete", u"do",     u"else",
    u"finally", u"for",  u"function", u"if",     u"in",       u"instanceof", u"new", u"return", u"switch",
    u"this",  u"throw",  u"try",    u"typeof",   u"var",      u"void",    u"while",  u"with",   u"null",
    u"true",  u"false",  u"class",  u"const",    u"enum",     u"export",  u"extends", u"import", u"super",
};

bool is_keyword_text(std::u16string_view s)
{
    return std::find(keywords.begin(), keywords.end(), s) != keywords.end();
}

bool is_future_reserved(std::u16string_view s)
{
    return s == u"class" || s == u"enum" || s == u"export" || s == u"extends" || s == u"import" || s == u"super";
}

bool is_ident_start(char16_t c)
{
    if (c < 0x80)
        return (c >= u'a' && c <= u'z') || (c >= u'A' && c <= u'Z') || c == u'$' || c == u'_';
    return !is_js_whitespace(c) && !is_js_line_terminator(c);
}

bool is_ident_part(char16_t c) { return is_ident_start(c) || (c >= u'0' && c <= u'9'); }

int hex_value(char16_t c)
{
    if (c >= u'0' && c <= u'9')
        return c - u'0';
    if (c >= u'a' && c <= u'f')
        return c - u'a' + 10;
    if (c >= u'A' && c <= u'F')
        return c - u'A' + 10;
    return -1;
}

// Ordered longest first.
constexpr std::array<std::u16string_view, 48> punctuators {
    u">>>=", u"===", u"!==", u">>>", u"<<=", u">>=", u"<=", u">=", u"==", u"!=", u"++", u"--", u"<<",
    u">>",   u"&&",  u"||",  u"+=",  u"-=",  u"*=",  u"%=", u"&=", u"|=", u"^=", u"/=", u"{",  u"}",
    u"(",    u")",   u"[",   u"]",   u".",   u";",   u",",  u"<",  u">",  u"+",  u"-",  u"*",  u"%",
    u"&",    u"|",   u"^",   u"!",   u"~",   u"?",   u":",  u"=",  u"/",
};

class Lexer {
public:
    explicit Lexer(std::u16string_view src) : src_(src) { }

    Pos pos() const { return pos_; }
    void reset(Pos p) { pos_ = p; }

    Token next()
    {
        Token t;
        t.newline_before = skip_trivia();
        t.start = pos_;
        if (at_end()) {
            t.type = Tok::Eof;
            t.end = pos_;
            return t;
        }
        char16_t c = peek();
        if (is_ident_start(c) || c == u'\\') {
            bool escaped = false;
            t.value = read_identifier(escaped);
            t.type = !escaped && is_keyword_text(t.value) ? Tok::Keyword : Tok::Identifier;
        } else if ((c >= u'0' && c <= u'9') || (c == u'.' && pos_.offset + 1 < src_.size() && src_[pos_.offset + 1] >= u'0'
                                                   && src_[pos_.offset + 1] <= u'9')) {
            t.type = Tok::Number;
            t.number = read_number();
        } else if (c == u'"' || c == u'\'') {
            t.type = Tok::String;
            t.value = read_string();
        } else {
            t.type = Tok::Punct;
            t.value = read_punct();
        }
        t.end = pos_;
        return t;
    }

    // Re-read the token starting at `start` (a `/` or `/=`) as a regex literal.
    Token rescan_regex(Token const& slash)
    {
        pos_ = slash.start;
        Token t;
        t.newline_before = slash.newline_before;
        t.start = pos_;
        t.type = Tok::Regex;
        advance(); // '/'
        bool in_class = false;
        for (;;) {
            if (at_end() || is_js_line_terminator(peek()))
                fail("unterminated regular expression");
            char16_t c = peek();
            if (c == u'\\') {
                t.value.push_back(c);
                advance();
                if (at_end() || is_js_line_terminator(peek()))
                    fail("unterminated regular expression");
                t.value.push_back(peek());
                advance();
                continue;
            }
            if (c == u'[')
                in_class = true;
            else if (c == u']')
                in_class = false;
            else if (c == u'/' && !in_class)
                break;
            t.value.push_back(c);
            advance();
        }
        advance(); // closing '/'
        while (!at_end() && is_ident_part(peek())) {
            t.flags.push_back(peek());
            advance();
        }
        t.end = pos_;
        return t;
    }

private:
    std::u16string_view src_;
    Pos pos_;

    bool at_end() const { return pos_.offset >= src_.size(); }
    char16_t peek(uint32_t ahead = 0) const
    {
        return pos_.offset + ahead < src_.size() ? src_[pos_.offset + ahead] : char16_t(0);
    }

    [[noreturn]] void fail(std::string message) const { throw FatalError { make_span(pos_, pos_), std::move(message) }; }

    void advance()
    {
        char16_t c = src_[pos_.offset];
        uint32_t bytes;
        if (c < 0x80)
            bytes = 1;
        else if (c < 0x800)
            bytes = 2;
        else if (c >= 0xD800 && c <= 0xDBFF && pos_.offset + 1 < src_.size() && src_[pos_.offset + 1] >= 0xDC00
                 && src_[pos_.offset + 1] <= 0xDFFF)
            bytes = 2; // half of a 4-byte sequence
        else if (c >= 0xDC00 && c <= 0xDFFF && pos_.offset > 0 && src_[pos_.offset - 1] >= 0xD800
                 && src_[pos_.offset - 1] <= 0xDBFF)
            bytes = 2;
        else
            bytes = 3;
        ++pos_.offset;
        pos_.byte += bytes;
        bool newline = c == u'\n' || c == 0x2028 || c == 0x2029 || (c == u'\r' && peek() != u'\n');
        if (newline) {
            ++pos_.line;
            pos_.column = 1;
        } else {
            ++pos_.column;
        }
    }

    // Skips whitespace and comments; returns whether a line terminator was crossed.
    bool skip_trivia()
    {
        bool newline = pos_.offset == 0;
        bool saw_newline = false;
        while (!at_end()) {
            char16_t c = peek();
            if (is_js_whitespace(c)) {
                advance();
            } else if (is_js_line_terminator(c)) {
                advance();
                newline = saw_newline = true;
            } else if (c == u'/' && peek(1) == u'/') {
                skip_line();
            } else if (c == u'/' && peek(1) == u'*') {
                advance();
                advance();
                for (;;) {
                    if (at_end())
                        fail("unterminated comment");
                    if (peek() == u'*' && peek(1) == u'/') {
                        advance();
                        advance();
                        break;
                    }
                    if (is_js_line_terminator(peek()))
                        newline = saw_newline = true;
                    advance();
                }
            } else if (c == u'<' && peek(1) == u'!' && peek(2) == u'-' && peek(3) == u'-') {
                skip_line();
            } else if (newline && c == u'-' && peek(1) == u'-' && peek(2) == u'>') {
                skip_line();
            } else {
                break;
            }
        }
        return saw_newline;
    }

    void skip_line()
    {
        while (!at_end() && !is_js_line_terminator(peek()))
            advance();
    }

    char16_t read_unicode_escape()
    {
        // at 'u' after a backslash
        advance();
        int v = 0;
        for (int i = 0; i < 4; ++i) {
            int h = hex_value(peek());
            if (at_end() || h < 0)
                fail("malformed unicode escape");
            v = v * 16 + h;
            advance();
        }
        return static_cast<char16_t>(v);
    }

    std::u16string read_identifier(bool& escaped)
    {
        std::u16string out;
        while (!at_end()) {
            char16_t c = peek();
            if (c == u'\\') {
                advance();
                if (peek() != u'u')
                    fail("invalid escape in identifier");
                char16_t v = read_unicode_escape();
                if (out.empty() ? !is_ident_start(v) : !is_ident_part(v))
                    fail("invalid identifier escape");
                out.push_back(v);
                escaped = true;
            } else if (is_ident_part(c)) {
                out.push_back(c);
                advance();
            } else {
                break;
            }
        }
        return out;
    }

    double read_number()
    {
        std::string ascii;
        double value;
        if (peek() == u'0' && (peek(1) == u'x' || peek(1) == u'X')) {
            advance();
            advance();
            if (hex_value(peek()) < 0)
                fail("malformed hex literal");
            value = 0;
            while (!at_end() && hex_value(peek()) >= 0) {
                value = value * 16 + hex_value(peek());
                advance();
            }
        } else {
            bool legacy_octal = peek() == u'0' && peek(1) >= u'0' && peek(1) <= u'9';
            auto digits = [&] {
                while (!at_end() && peek() >= u'0' && peek() <= u'9') {
                    ascii.push_back(static_cast<char>(peek()));
                    advance();
                }
            };
            digits();
            if (legacy_octal && ascii.find_first_of("89") == std::string::npos) {
                value = 0;
                for (char d : ascii)
                    value = value * 8 + (d - '0');
            } else {
                if (peek() == u'.') {
                    ascii.push_back('.');
                    advance();
                    digits();
                }
                if (peek() == u'e' || peek() == u'E') {
                    ascii.push_back('e');
                    advance();
                    if (peek() == u'+' || peek() == u'-') {
                        ascii.push_back(static_cast<char>(peek()));
                        advance();
                    }
                    if (!(peek() >= u'0' && peek() <= u'9'))
                        fail("malformed exponent");
                    digits();
                }
                value = std::strtod(ascii.c_str(), nullptr);
            }
        }
        if (!at_end() && (is_ident_start(peek()) || (peek() >= u'0' && peek() <= u'9') || peek() == u'\\'))
            fail("identifier directly after number");
        return value;
    }

    std::u16string read_string()
    {
        char16_t quote = peek();
        advance();
        std::u16string out;
        for (;;) {
            if (at_end())
                fail("unterminated string");
            char16_t c = peek();
            if (c == quote) {
                advance();
                return out;
            }
            if (is_js_line_terminator(c))
                fail("line break in string");
            if (c != u'\\') {
                out.push_back(c);
                advance();
                continue;
            }
            advance();
            if (at_end())
                fail("unterminated string");
            char16_t e = peek();
            switch (e) {
            case u'b': out.push_back(u'\b'); advance(); break;
            case u't': out.push_back(u'\t'); advance(); break;
            case u'n': out.push_back(u'\n'); advance(); break;
            case u'v': out.push_back(u'\v'); advance(); break;
            case u'f': out.push_back(u'\f'); advance(); break;
            case u'r': out.push_back(u'\r'); advance(); break;
            case u'x': {
                advance();
                int h1 = hex_value(peek());
                int h2 = hex_value(peek(1));
                if (h1 < 0 || h2 < 0 || pos_.offset + 1 >= src_.size())
                    fail("malformed hex escape");
                advance();
                advance();
                out.push_back(static_cast<char16_t>(h1 * 16 + h2));
                break;
            }
            case u'u': out.push_back(read_unicode_escape()); break;
            case u'\r':
                advance();
                if (peek() == u'\n')
                    advance();
                break;
            case u'\n':
            case 0x2028:
            case 0x2029: advance(); break;
            default:
                if (e >= u'0' && e <= u'7') {
                    // legacy octal escape, up to \377
                    int v = 0;
                    int max_len = e <= u'3' ? 3 : 2;
                    for (int i = 0; i < max_len && peek() >= u'0' && peek() <= u'7'; ++i) {
                        v = v * 8 + (peek() - u'0');
                        advance();
                    }
                    out.push_back(static_cast<char16_t>(v));
                } else {
                    out.push_back(e);
                    advance();
                }
            }
        }
    }

    std::u16string read_punct()
    {
        for (auto const& p : punctuators) {
            if (src_.substr(pos_.offset, p.size()) == p) {
                for (size_t i = 0; i < p.size(); ++i)
                    advance();
                return std::u16string(p);
            }
        }
        fail("unexpected character");
    }
};

Op binary_op(std::u16string_view p)
{
    static constexpr std::pair<std::u16string_view, Op> table[] = {
        { u"+", Op::Add },        { u"-", Op::Sub },   { u"*", Op::Mul },   { u"/", Op::Div },
        { u"%", Op::Mod },        { u"<<", Op::Shl },  { u">>", Op::Shr },  { u">>>", Op::UShr },
        { u"&", Op::BitAnd },     { u"|", Op::BitOr }, { u"^", Op::BitXor }, { u"<", Op::Lt },
        { u">", Op::Gt },         { u"<=", Op::Le },   { u">=", Op::Ge },   { u"==", Op::Eq },
        { u"!=", Op::Ne },        { u"===", Op::StrictEq }, { u"!==", Op::StrictNe }, { u"in", Op::In },
        { u"instanceof", Op::Instanceof }, { u"&&", Op::And }, { u"||", Op::Or },
    };
    for (auto const& [text, op] : table) {
        if (text == p)
            return op;
    }
    return Op::None;
}

int precedence(Op op)
{
    switch (op) {
    case Op::Or: return 1;
    case Op::And: return 2;
    case Op::BitOr: return 3;
    case Op::BitXor: return 4;
    case Op::BitAnd: return 5;
    case Op::Eq:
    case Op::Ne:
    case Op::StrictEq:
    case Op::StrictNe: return 6;
    case Op::Lt:
    case Op::Gt:
    case Op::Le:
    case Op::Ge:
    case Op::In:
    case Op::Instanceof: return 7;
    case Op::Shl:
    case Op::Shr:
    case Op::UShr: return 8;
    case Op::Add:
    case Op::Sub: return 9;
    case Op::Mul:
    case Op::Div:
    case Op::Mod: return 10;
    default: return 0;
    }
}

// Guards native stack use; tree height is limited separately.
constexpr int max_recursion = 4 * max_nesting_depth;

class Parser {
public:
    Parser(std::u16string_view src, uint32_t first_site) : lex_(src), next_site_(first_site) { }

    std::vector<ParseDiagnostic> diagnostics;

    std::vector<NodePtr> parse_program()
    {
        advance();
        std::vector<NodePtr> body;
        while (tok_.type != Tok::Eof)
            body.push_back(parse_statement(true));
        return body;
    }

    uint32_t next_site() const { return next_site_; }

private:
    Lexer lex_;
    Token tok_;
    Pos prev_end_;
    uint32_t next_site_;
    int recursion_ = 0;
    int function_depth_ = 0;
    int loop_depth_ = 0;
    int switch_depth_ = 0;
    std::vector<std::u16string> labels_;

    struct Guard {
        Parser& p;
        explicit Guard(Parser& parser) : p(parser)
        {
            if (++p.recursion_ > max_recursion)
                p.fail("nesting too deep");
        }
        ~Guard() { --p.recursion_; }
    };

    [[noreturn]] void fail(std::string message) const
    {
        throw FatalError { make_span(tok_.start, tok_.end), std::move(message) };
    }

    void recoverable(Pos start, std::string message)
    {
        diagnostics.push_back({ make_span(start, prev_end_), std::move(message), Severity::Recoverable });
    }

    void advance()
    {
        prev_end_ = tok_.end;
        tok_ = lex_.next();
    }

    Token peek_token()
    {
        Pos saved = lex_.pos();
        Token t = lex_.next();
        lex_.reset(saved);
        return t;
    }

    bool is_punct(std::u16string_view p) const { return tok_.type == Tok::Punct && tok_.value == p; }
    bool is_keyword(std::u16string_view k) const { return tok_.type == Tok::Keyword && tok_.value == k; }

    void expect_punct(std::u16string_view p)
    {
        if (!is_punct(p))
            fail("expected '" + utf16_to_utf8(p) + "'");
        advance();
    }

    void expect_keyword(std::u16string_view k)
    {
        if (!is_keyword(k))
            fail("expected '" + utf16_to_utf8(k) + "'");
        advance();
    }

    std::u16string expect_identifier()
    {
        if (tok_.type != Tok::Identifier)
            fail("expected identifier");
        std::u16string name = tok_.value;
        advance();
        return name;
    }

    void consume_semicolon()
    {
        if (is_punct(u";")) {
            advance();
            return;
        }
        if (is_punct(u"}") || tok_.type == Tok::Eof || tok_.newline_before)
            return;
        fail("expected ';'");
    }

    std::shared_ptr<Node> node(NodeKind kind) const
    {
        auto n = std::make_shared<Node>();
        n->kind = kind;
        return n;
    }

    NodePtr finish(std::shared_ptr<Node> n, Pos start)
    {
        n->span = make_span(start, prev_end_);
        uint32_t h = 0;
        for (auto const* child : { &n->a, &n->b, &n->c, &n->d }) {
            if (*child)
                h = std::max(h, (*child)->height);
        }
        for (auto const& item : n->items) {
            if (item)
                h = std::max(h, item->height);
        }
        n->height = h + 1;
        if (n->height > static_cast<uint32_t>(max_nesting_depth))
            throw FatalError { n->span, "nesting too deep" };
        switch (n->kind) {
        case NodeKind::Function:
        case NodeKind::FunctionDecl:
        case NodeKind::Array:
        case NodeKind::Object:
        case NodeKind::Regex:
        case NodeKind::New: n->site = next_site_++; break;
        default: break;
        }
        return n;
    }

    // ---- statements

    NodePtr parse_statement(bool top_level = false)
    {
        Guard guard(*this);
        Pos start = tok_.start;
        if (tok_.type == Tok::Punct) {
            if (tok_.value == u"{")
                return parse_block();
            if (tok_.value == u";") {
                advance();
                return finish(node(NodeKind::Empty), start);
            }
        }
        if (tok_.type == Tok::Keyword) {
            std::u16string_view k = tok_.value;
            if (k == u"var" || k == u"const") {
                auto decl = parse_var(false);
                consume_semicolon();
                return with_end(decl);
            }
            if (k == u"function") {
                auto fn = parse_function(NodeKind::FunctionDecl);
                if (!top_level)
                    recoverable(start, "function declaration in statement position");
                return fn;
            }
            if (k == u"if")
                return parse_if();
            if (k == u"while")
                return parse_while();
            if (k == u"do")
                return parse_do();
            if (k == u"for")
                return parse_for();
            if (k == u"return") {
                advance();
                auto n = node(NodeKind::Return);
                if (!is_punct(u";") && !is_punct(u"}") && tok_.type != Tok::Eof && !tok_.newline_before)
                    n->a = parse_expression(false);
                consume_semicolon();
                if (function_depth_ == 0)
                    recoverable(start, "return outside function");
                return finish(n, start);
            }
            if (k == u"break" || k == u"continue")
                return parse_jump(k == u"break");
            if (k == u"throw") {
                advance();
                if (tok_.newline_before)
                    fail("line break after throw");
                auto n = node(NodeKind::Throw);
                n->a = parse_expression(false);
                consume_semicolon();
                return finish(n, start);
            }
            if (k == u"try")
                return parse_try();
            if (k == u"switch")
                return parse_switch();
            if (k == u"with") {
                advance();
                expect_punct(u"(");
                auto n = node(NodeKind::With);
                n->a = parse_expression(false);
                expect_punct(u")");
                n->b = parse_statement();
                recoverable(start, "with statement");
                return finish(n, start);
            }
            if (k == u"debugger") {
                advance();
                consume_semicolon();
                return finish(node(NodeKind::Debugger), start);
            }
        }
        if (tok_.type == Tok::Identifier) {
            Token next = peek_token();
            if (next.type == Tok::Punct && next.value == u":") {
                std::u16string label = tok_.value;
                advance();
                advance();
                if (std::find(labels_.begin(), labels_.end(), label) != labels_.end())
                    fail("duplicate label");
                labels_.push_back(label);
                auto n = node(NodeKind::Labeled);
                n->text = label;
                n->a = parse_statement();
                labels_.pop_back();
                return finish(n, start);
            }
        }
        auto n = node(NodeKind::ExprStmt);
        n->a = parse_expression(false);
        consume_semicolon();
        return finish(n, start);
    }

    // Re-finishes a node so its span includes a trailing semicolon.
    NodePtr with_end(NodePtr n)
    {
        auto copy = std::make_shared<Node>(*n);
        copy->span.end = prev_end_.offset;
        copy->span.byte_end = prev_end_.byte;
        return copy;
    }

    NodePtr parse_block()
    {
        Pos start = tok_.start;
        expect_punct(u"{");
        auto n = node(NodeKind::Block);
        while (!is_punct(u"}")) {
            if (tok_.type == Tok::Eof)
                fail("unterminated block");
            n->items.push_back(parse_statement());
        }
        advance();
        return finish(n, start);
    }

    NodePtr parse_var(bool no_in)
    {
        Pos start = tok_.start;
        bool is_const = is_keyword(u"const");
        advance();
        if (is_const)
            recoverable(start, "const declaration treated as var");
        auto n = node(NodeKind::VarDecl);
        n->flag = is_const;
        do {
            if (!n->items.empty())
                advance(); // ','
            Pos dstart = tok_.start;
            auto d = node(NodeKind::Declarator);
            d->text = expect_identifier();
            if (is_punct(u"=")) {
                advance();
                d->a = parse_assignment(no_in);
            }
            n->items.push_back(finish(d, dstart));
        } while (is_punct(u","));
        return finish(n, start);
    }

    NodePtr parse_if()
    {
        Pos start = tok_.start;
        advance();
        expect_punct(u"(");
        auto n = node(NodeKind::If);
        n->a = parse_expression(false);
        expect_punct(u")");
        n->b = parse_statement();
        if (is_keyword(u"else")) {
            advance();
            n->c = parse_statement();
        }
        return finish(n, start);
    }

    NodePtr loop_body()
    {
        ++loop_depth_;
        auto body = parse_statement();
        --loop_depth_;
        return body;
    }

    NodePtr parse_while()
    {
        Pos start = tok_.start;
        advance();
        expect_punct(u"(");
        auto n = node(NodeKind::While);
        n->a = parse_expression(false);
        expect_punct(u")");
        n->b = loop_body();
        return finish(n, start);
    }

    NodePtr parse_do()
    {
        Pos start = tok_.start;
        advance();
        auto n = node(NodeKind::DoWhile);
        n->a = loop_body();
        expect_keyword(u"while");
        expect_punct(u"(");
        n->b = parse_expression(false);
        expect_punct(u")");
        if (is_punct(u";"))
            advance();
        return finish(n, start);
    }

    static bool is_assignable(Node const& n)
    {
        return n.kind == NodeKind::Identifier || n.kind == NodeKind::Member || n.kind == NodeKind::Index;
    }

    NodePtr parse_for()
    {
        Pos start = tok_.start;
        advance();
        expect_punct(u"(");
        NodePtr init;
        if (is_keyword(u"var") || is_keyword(u"const")) {
            init = parse_var(true);
            if (is_keyword(u"in")) {
                if (init->items.size() != 1)
                    fail("for-in with several declarations");
                return finish_for_in(init, start);
            }
        } else if (!is_punct(u";")) {
            init = parse_expression(true);
            if (is_keyword(u"in")) {
                if (!is_assignable(*init))
                    fail("invalid for-in target");
                return finish_for_in(init, start);
            }
        }
        expect_punct(u";");
        auto n = node(NodeKind::For);
        n->a = init;
        if (!is_punct(u";"))
            n->b = parse_expression(false);
        expect_punct(u";");
        if (!is_punct(u")"))
            n->c = parse_expression(false);
        expect_punct(u")");
        n->d = loop_body();
        return finish(n, start);
    }

    NodePtr finish_for_in(NodePtr target, Pos start)
    {
        advance(); // 'in'
        auto n = node(NodeKind::ForIn);
        n->a = std::move(target);
        n->b = parse_expression(false);
        expect_punct(u")");
        n->c = loop_body();
        return finish(n, start);
    }

    NodePtr parse_jump(bool is_break)
    {
        Pos start = tok_.start;
        advance();
        auto n = node(is_break ? NodeKind::Break : NodeKind::Continue);
        if (tok_.type == Tok::Identifier && !tok_.newline_before) {
            n->text = tok_.value;
            if (std::find(labels_.begin(), labels_.end(), n->text) == labels_.end())
                fail("undefined label");
            advance();
        } else if (is_break ? (loop_depth_ == 0 && switch_depth_ == 0) : loop_depth_ == 0) {
            fail(is_break ? "break outside loop or switch" : "continue outside loop");
        }
        consume_semicolon();
        return finish(n, start);
    }

    NodePtr parse_try()
    {
        Pos start = tok_.start;
        advance();
        auto n = node(NodeKind::Try);
        n->a = parse_block();
        if (is_keyword(u"catch")) {
            advance();
            expect_punct(u"(");
            n->text = expect_identifier();
            expect_punct(u")");
            n->b = parse_block();
        }
        if (is_keyword(u"finally")) {
            advance();
            n->c = parse_block();
        }
        if (!n->b && !n->c)
            fail("try without catch or finally");
        return finish(n, start);
    }

    NodePtr parse_switch()
    {
        Pos start = tok_.start;
        advance();
        expect_punct(u"(");
        auto n = node(NodeKind::Switch);
        n->a = parse_expression(false);
        expect_punct(u")");
        expect_punct(u"{");
        bool seen_default = false;
        ++switch_depth_;
        while (!is_punct(u"}")) {
            Pos cstart = tok_.start;
            auto c = node(NodeKind::Case);
            if (is_keyword(u"case")) {
                advance();
                c->a = parse_expression(false);
            } else if (is_keyword(u"default")) {
                if (seen_default)
                    fail("duplicate default clause");
                seen_default = true;
                advance();
            } else {
                fail("expected case or default");
            }
            expect_punct(u":");
            while (!is_punct(u"}") && !is_keyword(u"case") && !is_keyword(u"default")) {
                if (tok_.type == Tok::Eof)
                    fail("unterminated switch");
                c->items.push_back(parse_statement());
            }
            n->items.push_back(finish(c, cstart));
        }
        --switch_depth_;
        advance();
        return finish(n, start);
    }

    NodePtr parse_function(NodeKind kind)
    {
        Pos start = tok_.start;
        advance(); // 'function'
        auto n = node(kind);
        if (tok_.type == Tok::Identifier)
            n->text = expect_identifier();
        else if (kind == NodeKind::FunctionDecl)
            fail("function declaration without name");
        expect_punct(u"(");
        while (!is_punct(u")")) {
            if (!n->params.empty())
                expect_punct(u",");
            n->params.push_back(expect_identifier());
        }
        advance();
        parse_function_body(*n);
        return finish(n, start);
    }

    void parse_function_body(Node& n)
    {
        expect_punct(u"{");
        auto saved_labels = std::move(labels_);
        labels_.clear();
        int saved_loop = loop_depth_, saved_switch = switch_depth_;
        loop_depth_ = switch_depth_ = 0;
        ++function_depth_;
        while (!is_punct(u"}")) {
            if (tok_.type == Tok::Eof)
                fail("unterminated function body");
            n.items.push_back(parse_statement(true));
        }
        --function_depth_;
        loop_depth_ = saved_loop;
        switch_depth_ = saved_switch;
        labels_ = std::move(saved_labels);
        advance();
    }

    // ---- expressions

    NodePtr parse_expression(bool no_in)
    {
        Pos start = tok_.start;
        auto first = parse_assignment(no_in);
        if (!is_punct(u","))
            return first;
        auto n = node(NodeKind::Sequence);
        n->items.push_back(first);
        while (is_punct(u",")) {
            advance();
            n->items.push_back(parse_assignment(no_in));
        }
        return finish(n, start);
    }

    static Op assignment_op(Token const& t)
    {
        if (t.type != Tok::Punct || t.value.empty() || t.value.back() != u'=')
            return Op::None;
        std::u16string_view v = t.value;
        if (v == u"=")
            return Op::Assign;
        if (v == u"==" || v == u"===" || v == u"!=" || v == u"!==" || v == u"<=" || v == u">=")
            return Op::None;
        return binary_op(v.substr(0, v.size() - 1));
    }

    NodePtr parse_assignment(bool no_in)
    {
        Guard guard(*this);
        Pos start = tok_.start;
        auto target = parse_conditional(no_in);
        Op op = assignment_op(tok_);
        if (op == Op::None)
            return target;
        if (!is_assignable(*target))
            fail("invalid assignment target");
        advance();
        auto n = node(NodeKind::Assign);
        n->op = Op::Assign;
        n->assign_op = op == Op::Assign ? Op::None : op;
        n->a = target;
        n->b = parse_assignment(no_in);
        return finish(n, start);
    }

    NodePtr parse_conditional(bool no_in)
    {
        Pos start = tok_.start;
        auto test = parse_binary(0, no_in);
        if (!is_punct(u"?"))
            return test;
        advance();
        auto n = node(NodeKind::Conditional);
        n->a = test;
        n->b = parse_assignment(false);
        expect_punct(u":");
        n->c = parse_assignment(no_in);
        return finish(n, start);
    }

    Op current_binary_op(bool no_in) const
    {
        if (tok_.type == Tok::Punct)
            return binary_op(tok_.value);
        if (tok_.type == Tok::Keyword && (tok_.value == u"instanceof" || (!no_in && tok_.value == u"in")))
            return binary_op(tok_.value);
        return Op::None;
    }

    NodePtr parse_binary(int min_prec, bool no_in)
    {
        Pos start = tok_.start;
        auto left = parse_unary();
        for (;;) {
            Op op = current_binary_op(no_in);
            int prec = precedence(op);
            if (prec == 0 || prec <= min_prec)
                return left;
            advance();
            Guard guard(*this);
            auto right = parse_binary(prec, no_in);
            auto n = node(op == Op::And || op == Op::Or ? NodeKind::Logical : NodeKind::Binary);
            n->op = op;
            n->a = left;
            n->b = right;
            left = finish(n, start);
        }
    }

    NodePtr parse_unary()
    {
        Guard guard(*this);
        Pos start = tok_.start;
        Op op = Op::None;
        if (tok_.type == Tok::Punct) {
            std::u16string_view v = tok_.value;
            if (v == u"-")
                op = Op::Neg;
            else if (v == u"+")
                op = Op::Plus;
            else if (v == u"!")
                op = Op::Not;
            else if (v == u"~")
                op = Op::BitNot;
            else if (v == u"++" || v == u"--") {
                auto n = node(NodeKind::Update);
                n->op = v == u"++" ? Op::Inc : Op::Dec;
                advance();
                n->flag = true;
                n->a = parse_unary();
                if (!is_assignable(*n->a))
                    fail("invalid update target");
                return finish(n, start);
            }
        } else if (tok_.type == Tok::Keyword) {
            if (tok_.value == u"typeof")
                op = Op::Typeof;
            else if (tok_.value == u"void")
                op = Op::Void;
            else if (tok_.value == u"delete")
                op = Op::Delete;
        }
        if (op != Op::None) {
            advance();
            auto n = node(NodeKind::Unary);
            n->op = op;
            n->a = parse_unary();
            return finish(n, start);
        }
        auto operand = parse_lhs();
        if ((is_punct(u"++") || is_punct(u"--")) && !tok_.newline_before) {
            if (!is_assignable(*operand))
                fail("invalid update target");
            auto n = node(NodeKind::Update);
            n->op = is_punct(u"++") ? Op::Inc : Op::Dec;
            n->a = operand;
            advance();
            return finish(n, start);
        }
        return operand;
    }

    std::vector<NodePtr> parse_arguments()
    {
        expect_punct(u"(");
        std::vector<NodePtr> args;
        while (!is_punct(u")")) {
            if (!args.empty())
                expect_punct(u",");
            args.push_back(parse_assignment(false));
        }
        advance();
        return args;
    }

    std::u16string property_name_after_dot()
    {
        if (tok_.type != Tok::Identifier && tok_.type != Tok::Keyword)
            fail("expected property name");
        std::u16string name = tok_.value;
        advance();
        return name;
    }

    bool parse_member_suffix(NodePtr& e, Pos start)
    {
        if (is_punct(u".")) {
            advance();
            auto n = node(NodeKind::Member);
            n->a = e;
            n->text = property_name_after_dot();
            e = finish(n, start);
            return true;
        }
        if (is_punct(u"[")) {
            advance();
            auto n = node(NodeKind::Index);
            n->a = e;
            n->b = parse_expression(false);
            expect_punct(u"]");
            e = finish(n, start);
            return true;
        }
        return false;
    }

    NodePtr parse_member()
    {
        Guard guard(*this);
        Pos start = tok_.start;
        NodePtr e;
        if (is_keyword(u"new")) {
            advance();
            auto n = node(NodeKind::New);
            n->a = parse_member();
            if (!is_punct(u"("))
                return finish(n, start);
            n->items = parse_arguments();
            e = finish(n, start);
        } else {
            e = parse_primary();
        }
        while (parse_member_suffix(e, start)) { }
        return e;
    }

    NodePtr parse_lhs()
    {
        Pos start = tok_.start;
        auto e = parse_member();
        for (;;) {
            if (parse_member_suffix(e, start))
                continue;
            if (is_punct(u"(")) {
                auto n = node(NodeKind::Call);
                n->a = e;
                n->items = parse_arguments();
                e = finish(n, start);
                continue;
            }
            return e;
        }
    }

    NodePtr parse_primary()
    {
        Pos start = tok_.start;
        switch (tok_.type) {
        case Tok::Identifier: {
            auto n = node(NodeKind::Identifier);
            n->text = tok_.value;
            advance();
            return finish(n, start);
        }
        case Tok::Number: {
            auto n = node(NodeKind::Number);
            n->number = tok_.number;
            advance();
            return finish(n, start);
        }
        case Tok::String: {
            auto n = node(NodeKind::String);
            n->text = tok_.value;
            advance();
            return finish(n, start);
        }
        case Tok::Keyword: {
            std::u16string_view k = tok_.value;
            if (k == u"this" || k == u"null" || k == u"true" || k == u"false") {
                auto n = node(k == u"this" ? NodeKind::This : k == u"null" ? NodeKind::Null : NodeKind::Boolean);
                n->flag = k == u"true";
                advance();
                return finish(n, start);
            }
            if (k == u"function")
                return parse_function(NodeKind::Function);
            if (is_future_reserved(k) || k == u"const")
                fail("reserved word '" + utf16_to_utf8(k) + "'");
            fail("unexpected keyword '" + utf16_to_utf8(k) + "'");
        }
        case Tok::Punct: {
            std::u16string_view p = tok_.value;
            if (p == u"(") {
                advance();
                auto e = parse_expression(false);
                expect_punct(u")");
                return e;
            }
            if (p == u"[")
                return parse_array();
            if (p == u"{")
                return parse_object();
            if (p == u"/" || p == u"/=") {
                tok_ = lex_.rescan_regex(tok_);
                auto n = node(NodeKind::Regex);
                n->text = tok_.value;
                n->extra = tok_.flags;
                advance();
                return finish(n, start);
            }
            fail("unexpected '" + utf16_to_utf8(p) + "'");
        }
        case Tok::Eof: fail("unexpected end of input");
        case Tok::Regex: break;
        }
        fail("unexpected token");
    }

    NodePtr parse_array()
    {
        Pos start = tok_.start;
        advance();
        auto n = node(NodeKind::Array);
        while (!is_punct(u"]")) {
            if (is_punct(u",")) {
                advance();
                n->items.push_back(nullptr);
                continue;
            }
            n->items.push_back(parse_assignment(false));
            if (!is_punct(u"]"))
                expect_punct(u",");
        }
        advance();
        return finish(n, start);
    }

    std::u16string property_key()
    {
        std::u16string key;
        switch (tok_.type) {
        case Tok::Identifier:
        case Tok::Keyword:
        case Tok::String: key = tok_.value; break;
        case Tok::Number: key = number_to_u16string(tok_.number); break;
        default: fail("expected property name");
        }
        advance();
        return key;
    }

    NodePtr parse_object()
    {
        Pos start = tok_.start;
        advance();
        auto n = node(NodeKind::Object);
        while (!is_punct(u"}")) {
            Pos pstart = tok_.start;
            auto prop = node(NodeKind::Property);
            prop->op = Op::Init;
            if (tok_.type == Tok::Identifier && (tok_.value == u"get" || tok_.value == u"set")) {
                Token next = peek_token();
                bool accessor = next.type == Tok::Identifier || next.type == Tok::Keyword || next.type == Tok::String
                    || next.type == Tok::Number;
                if (accessor) {
                    prop->op = tok_.value == u"get" ? Op::Get : Op::Set;
                    advance();
                    prop->text = property_key();
                    Pos fstart = tok_.start;
                    auto fn = node(NodeKind::Function);
                    expect_punct(u"(");
                    if (prop->op == Op::Set)
                        fn->params.push_back(expect_identifier());
                    expect_punct(u")");
                    parse_function_body(*fn);
                    prop->a = finish(fn, fstart);
                    recoverable(pstart, "accessor property");
                }
            }
            if (prop->op == Op::Init) {
                prop->text = property_key();
                expect_punct(u":");
                prop->a = parse_assignment(false);
            }
            n->items.push_back(finish(prop, pstart));
            if (!is_punct(u"}"))
                expect_punct(u",");
        }
        advance();
        return finish(n, start);
    }
};

}

ParseResult parse_js(std::u16string_view source, ParserOptions const& options)
{
    ParseResult result;
    Parser parser(source, options.first_site);
    try {
        auto body = parser.parse_program();
        auto program = std::make_shared<Program>();
        program->source = std::u16string(source);
        program->body = std::move(body);
        program->first_site = options.first_site;
        program->next_site = parser.next_site();
        result.program = std::move(program);
        result.diagnostics = std::move(parser.diagnostics);
    } catch (FatalError const& e) {
        result.diagnostics = std::move(parser.diagnostics);
        result.diagnostics.push_back({ e.span, e.message, Severity::Fatal });
    }
    return result;
}

ParseResult parse_js_utf8(std::string_view source, ParserOptions const& options)
{
    return parse_js(utf8_to_utf16(source), options);
}

}
